"""Search direction from a polyhedral estimate of the Clarke subdifferential."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .clustering import ClusterModel, kmeans_directional
from .minnorm import MinNormResult, SpdMetric, min_norm_point

__all__ = ["DirectionOutcome", "compute_direction", "default_epsilon"]

STATIONARY_NORM = 1e-12


@dataclass
class DirectionOutcome:
    found: bool
    direction: np.ndarray
    xi_star: Optional[MinNormResult] = None
    p_used: int = 0
    total_residual: float = np.inf
    model: Optional[ClusterModel] = None


def default_epsilon(samples):
    return 1e-4 * max(1.0, float(np.sum(samples.quotients**2)))


def compute_direction(samples, metric=None, epsilon=None, h_max=20, seed=0, n_restarts=5):
    """Sweep cluster counts p = 2..min(r, n) and build a direction from the accepted model.

    Every p whose clustering explains the samples (total residual below
    ``epsilon``) replaces the previous candidate, so the largest qualifying p
    is kept. The direction is ``-B^{-1} xi* / ||B^{-1} xi*||`` where ``xi*`` is
    the minimum ``B^{-1}``-norm point of the convex hull of the generators.
    Nothing is found when no p qualifies or when ``xi*`` vanishes (the hull
    contains the origin, i.e. the samples look stationary).
    """
    r = len(samples)
    n = samples.directions.shape[1] if r else (metric.n if metric is not None else 0)
    if metric is None:
        metric = SpdMetric.identity(n)
    if epsilon is None:
        epsilon = default_epsilon(samples) if r else 1e-4
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if r and metric.n != n:
        raise ValueError(f"metric is {metric.n}x{metric.n} but samples live in R^{n}")

    accepted = None
    for p in range(2, min(r, n) + 1):
        model = kmeans_directional(samples, p, h_max=h_max, seed=seed, n_restarts=n_restarts)
        # an empty cluster means the model really has fewer than p generators
        if model.total_residual < epsilon and all(len(g) for g in model.assignments):
            accepted = (p, model)

    not_found = DirectionOutcome(False, np.zeros(n))
    if accepted is None:
        return not_found
    p, model = accepted
    mnp = min_norm_point(model.generators.T, metric, tol=1e-12)
    not_found.xi_star, not_found.p_used = mnp, p
    not_found.total_residual, not_found.model = model.total_residual, model
    if np.linalg.norm(mnp.point) <= STATIONARY_NORM:
        return not_found
    w = metric.solve(mnp.point)
    d = -w / np.linalg.norm(w)
    return DirectionOutcome(True, d, mnp, p, model.total_residual, model)
