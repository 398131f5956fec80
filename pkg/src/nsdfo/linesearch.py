"""Derivative-free linesearch with sufficient decrease and extrapolation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .clustering import SamplePair, SampleSet

__all__ = ["LineSearchConfig", "LineSearchResult", "continuous_search"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineSearchConfig:
    gamma: float = 1e-6
    delta: float = 0.5
    alpha_max: float = 1e3

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.alpha_max <= 0:
            raise ValueError("alpha_max must be positive")


@dataclass
class LineSearchResult:
    alpha: float
    direction: np.ndarray  # p+ (the searched direction, possibly flipped)
    samples: SampleSet
    evals_used: int
    f_new: float  # f(y + alpha * direction); equals f(y) when alpha == 0
    cap_hit: bool = False


def continuous_search(alpha_tilde, y, fy, p, samples, cfg, f):
    """Search along ``+p`` then ``-p`` from ``y`` with trial step ``alpha_tilde``.

    ``f`` is the (counted) objective and ``fy`` the cached value ``f(y)``.
    A step ``alpha`` is accepted when ``f(y + alpha p+) <= fy - gamma alpha^2``;
    on acceptance the step is expanded by ``1/delta`` while the test keeps
    holding and the step stays within ``alpha_max``, and the sample set is
    cleared. On double failure the two difference quotients are appended to
    ``samples`` and ``alpha = 0`` is returned.
    """
    if alpha_tilde <= 0:
        raise ValueError("alpha_tilde must be positive")
    p = np.asarray(p, dtype=float)
    if abs(np.linalg.norm(p) - 1.0) > 1e-12:
        raise ValueError("search direction must have unit norm")
    y = np.asarray(y, dtype=float)
    alpha = alpha_tilde
    g = cfg.gamma

    f_plus = f(y + alpha * p)
    evals = 1
    if f_plus <= fy - g * alpha**2:
        direction, f_acc = p, f_plus
    else:
        f_minus = f(y - alpha * p)
        evals = 2
        if f_minus <= fy - g * alpha**2:
            direction, f_acc = -p, f_minus
        else:
            new = SampleSet(
                [
                    SamplePair(p.copy(), (f_plus - fy) / alpha, alpha),
                    SamplePair(-p, (f_minus - fy) / alpha, alpha),
                ]
            )
            return LineSearchResult(0.0, p, samples + new, evals, fy)

    cap_hit = False
    while True:
        beta = alpha / cfg.delta
        if beta > cfg.alpha_max:
            cap_hit = True
            log.info("extrapolation capped at alpha_max=%g", cfg.alpha_max)
            break
        f_beta = f(y + beta * direction)
        evals += 1
        if f_beta > fy - g * beta**2:
            break
        alpha, f_acc = beta, f_beta
    return LineSearchResult(alpha, direction, SampleSet(), evals, f_acc, cap_hit)
