"""Directional k-means: fit p generators to direction/quotient samples.

Each sample ``(d_i, s_i)`` says that the directional derivative along
``d_i`` is roughly ``s_i``. If the objective is locally a max of p smooth
pieces, every sample is explained by one piece gradient ``v_j`` through
``d_i . v_j ~= s_i``. The alternation below (assign each sample to its best
generator, refit every generator by least squares) is a greedy heuristic for

    min_{v_1..v_p}  sum_i  min_j (d_i . v_j - s_i)^2 .
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "SamplePair",
    "SampleSet",
    "ClusterModel",
    "assign",
    "fit_generator",
    "kmeans_directional",
    "kmeans_restarts",
]


@dataclass(frozen=True)
class SamplePair:
    d: np.ndarray
    s: float
    # step length that produced the quotient; only used for curvature estimates
    alpha: Optional[float] = None


class SampleSet:
    """Insertion-ordered, immutable collection of :class:`SamplePair`."""

    __slots__ = ("pairs", "_D", "_s")

    def __init__(self, pairs: Sequence[SamplePair] = (), _checked: int = 0):
        self.pairs = tuple(pairs)
        if self.pairs:
            n = self.pairs[0].d.shape
            # the first _checked pairs are already known to agree
            if any(p.d.shape != n for p in self.pairs[_checked:]):
                raise ValueError("all sample directions must share one dimension")
        self._D = None
        self._s = None

    @classmethod
    def from_arrays(cls, D, s, alphas=None):
        D = np.atleast_2d(np.asarray(D, dtype=float))
        s = np.asarray(s, dtype=float).ravel()
        if alphas is None:
            alphas = [None] * len(s)
        return cls(SamplePair(D[i].copy(), float(s[i]), a) for i, a in enumerate(alphas))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def __add__(self, other):
        return SampleSet(self.pairs + tuple(other), _checked=len(self.pairs))

    def __repr__(self):
        return f"SampleSet(r={len(self)})"

    @property
    def directions(self) -> np.ndarray:
        """Samples as rows, shape (r, n)."""
        if self._D is None:
            self._D = np.array([p.d for p in self.pairs], dtype=float)
        return self._D

    @property
    def quotients(self) -> np.ndarray:
        if self._s is None:
            self._s = np.array([p.s for p in self.pairs], dtype=float)
        return self._s


@dataclass
class ClusterModel:
    generators: np.ndarray  # shape (p, n), one generator per row
    assignments: list  # list of p index arrays
    residuals: np.ndarray  # phi_j
    rounds: int = 0
    restart: Optional[int] = None
    # total residual after every fit, first fit included
    trace: list = field(default_factory=list)

    @property
    def p(self):
        return self.generators.shape[0]

    @property
    def total_residual(self) -> float:
        return float(np.sum(self.residuals))


def _residual_matrix(D, s, V):
    return (D @ V.T - s[:, None]) ** 2


def assign(samples, generators):
    """Partition sample indices by best-fitting generator (ties go to the lowest index)."""
    V = np.atleast_2d(np.asarray(generators, dtype=float))
    if len(samples) == 0:
        return [np.array([], dtype=int) for _ in range(V.shape[0])]
    labels = np.argmin(_residual_matrix(samples.directions, samples.quotients, V), axis=1)
    return _groups(labels, V.shape[0])


def _groups(labels, p):
    return [np.flatnonzero(labels == j) for j in range(p)]


def fit_generator(samples, subset):
    """Minimum-norm least-squares generator for the given sample indices.

    Returns ``(v, phi)`` where ``phi`` is the residual sum of squares. An empty
    subset yields the zero vector.
    """
    subset = np.asarray(subset, dtype=int)
    n = samples.directions.shape[1] if len(samples) else 0
    if subset.size == 0:
        return np.zeros(n), 0.0
    D = samples.directions[subset]
    s = samples.quotients[subset]
    v = np.linalg.lstsq(D, s, rcond=None)[0]
    return v, float(np.sum((D @ v - s) ** 2))


def _fit_all(samples, groups):
    fits = [fit_generator(samples, g) for g in groups]
    return np.array([v for v, _ in fits]), np.array([phi for _, phi in fits])


def _greedy_seeds(samples, p):
    """Farthest-residual seeding: each new generator fits the worst-explained sample exactly."""
    D, s = samples.directions, samples.quotients
    norms2 = np.einsum("ij,ij->i", D, D)
    V = np.zeros((0, D.shape[1]))
    worst = s**2
    for _ in range(p):
        i = int(np.argmax(worst))
        v = s[i] * D[i] / norms2[i]
        V = np.vstack([V, v])
        worst = np.minimum(worst, (D @ v - s) ** 2)
    return V


def _random_partition(r, p, rng):
    # every cluster gets at least one sample
    perm = rng.permutation(r)
    labels = np.empty(r, dtype=int)
    labels[perm[:p]] = np.arange(p)
    labels[perm[p:]] = rng.integers(0, p, size=r - p)
    return _groups(labels, p)


def _alternate(samples, groups, h_max):
    V, phi = _fit_all(samples, groups)
    trace = [float(phi.sum())]
    rounds = 0
    for _ in range(h_max):
        new_groups = assign(samples, V)
        if all(np.array_equal(a, b) for a, b in zip(new_groups, groups)):
            break
        groups = new_groups
        V, phi = _fit_all(samples, groups)
        trace.append(float(phi.sum()))
        rounds += 1
    return ClusterModel(V, groups, phi, rounds=rounds, trace=trace)


def kmeans_restarts(samples, p, h_max=20, seed=0, n_restarts=5, init_partition=None):
    """Run every restart and return all resulting models, in restart order.

    Restart 0 starts from farthest-residual seeding (deterministic); restarts
    1..n_restarts-1 start from random partitions into p nonempty groups drawn
    from ``seed``. With ``init_partition`` (a list of p index arrays) a single
    run starts from that partition instead.
    """
    r = len(samples)
    if not 1 <= p <= r:
        raise ValueError(f"need 1 <= p <= r, got p={p}, r={r}")
    if h_max < 1:
        raise ValueError("h_max must be at least 1")
    if init_partition is not None:
        groups = [np.asarray(g, dtype=int) for g in init_partition]
        if len(groups) != p:
            raise ValueError(f"init_partition has {len(groups)} groups, expected {p}")
        model = _alternate(samples, groups, h_max)
        model.restart = 0
        return [model]

    rng = np.random.default_rng(seed)
    models = []
    for restart in range(max(1, n_restarts)):
        if restart == 0:
            groups = assign(samples, _greedy_seeds(samples, p))
        else:
            groups = _random_partition(r, p, rng)
        model = _alternate(samples, groups, h_max)
        model.restart = restart
        models.append(model)
    return models


def kmeans_directional(samples, p, h_max=20, seed=0, n_restarts=5, init_partition=None):
    """Cluster ``samples`` into ``p`` groups and fit one generator per group.

    Each restart (see :func:`kmeans_restarts`) alternates assignment and
    refitting for at most ``h_max`` rounds, stopping early once the partition
    is stable. The model with the lowest total residual wins; ties go to the
    earlier restart.
    """
    models = kmeans_restarts(samples, p, h_max, seed, n_restarts, init_partition)
    best = models[0]
    for model in models[1:]:
        if model.total_residual < best.total_residual:
            best = model
    return best
