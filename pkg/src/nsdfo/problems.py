"""Black-box objectives, evaluation accounting and the nonsmooth test-problem registry.

Problem definitions follow the Lukšan–Vlček minimax collection and the
Haarala–Karmitsa large-scale collection. Start points are the standard ones
from those collections:

========== ====== ============================================ =============
name       n      x0                                           f*
========== ====== ============================================ =============
cb2        2      (1, -0.1)                                    1.9522245
cb3        >= 2   (2, ..., 2)  (chained CB3 I)                 2(n - 1)
chained-cb3 >= 2  (2, ..., 2)  (chained CB3 II)                2(n - 1)
crescent   2      (-1.5, 2)                                    0
demymalo   2      (1, 1)                                       -3
l1hilb     >= 2   (1, ..., 1)                                  0
maxl       >= 2   x_i = i (i <= n/2), -i otherwise             0
maxq       >= 2   x_i = i (i <= n/2), -i otherwise             0
maxquad    10     0                                            -0.8414083
shor       5      (0, 0, 0, 0, 1)                              22.600162
wong1      7      (1, 2, 0, 4, 0, 1, 1)                        680.6300573
========== ====== ============================================ =============
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "BudgetExhausted",
    "EvalCounter",
    "ObjectiveProblem",
    "evaluate_counted",
    "registry_get",
    "registry_names",
    "register",
]


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation is requested after the budget is spent."""


@dataclass(frozen=True)
class ObjectiveProblem:
    name: str
    dim: int
    start_point: np.ndarray
    evaluate: Callable[[np.ndarray], float] = field(repr=False)
    known_optimum: Optional[float] = None

    def __post_init__(self):
        x0 = np.asarray(self.start_point, dtype=float)
        if x0.shape != (self.dim,):
            raise ValueError(f"{self.name}: start point has shape {x0.shape}, expected ({self.dim},)")
        x0.setflags(write=False)
        object.__setattr__(self, "start_point", x0)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"{self.name}: expected a vector of length {self.dim}, got shape {x.shape}")
        return float(self.evaluate(x))


@dataclass
class EvalCounter:
    """Counts evaluations and keeps the best-so-far history.

    ``history`` holds ``(eval_index, best_value)`` pairs, appended only when the
    running best improves, so the values are strictly decreasing. ``budget``
    (optional) makes :func:`evaluate_counted` raise :class:`BudgetExhausted`
    instead of exceeding it.
    """

    budget: Optional[int] = None
    count: int = 0
    history: list = field(default_factory=list)
    best_x: Optional[np.ndarray] = None

    @property
    def best_value(self) -> float:
        return self.history[-1][1] if self.history else math.inf

    def reset(self):
        self.count = 0
        self.history = []
        self.best_x = None

    def record(self, x: np.ndarray, value: float):
        self.count += 1
        if value < self.best_value:
            self.history.append((self.count, value))
            self.best_x = np.array(x, dtype=float)


def evaluate_counted(problem: ObjectiveProblem, counter: EvalCounter, x) -> float:
    if counter.budget is not None and counter.count >= counter.budget:
        raise BudgetExhausted(f"budget of {counter.budget} evaluations exhausted")
    value = problem(x)
    counter.record(x, value)
    return value


# -- problem definitions -----------------------------------------------------

def _alternating_start(n):
    i = np.arange(1, n + 1, dtype=float)
    return np.where(i <= n // 2, i, -i)


def maxq(x):
    return np.max(x * x)


def maxl(x):
    return np.max(np.abs(x))


def _hilbert(n):
    i = np.arange(1, n + 1)
    return 1.0 / (i[:, None] + i[None, :] - 1)


def cb2(x):
    x1, x2 = x
    return max(x1**2 + x2**4, (2 - x1) ** 2 + (2 - x2) ** 2, 2 * math.exp(x2 - x1))


def chained_cb3_1(x):
    a, b = x[:-1], x[1:]
    terms = np.maximum(np.maximum(a**4 + b**2, (2 - a) ** 2 + (2 - b) ** 2), 2 * np.exp(b - a))
    return float(np.sum(terms))


def chained_cb3_2(x):
    a, b = x[:-1], x[1:]
    return max(
        float(np.sum(a**4 + b**2)),
        float(np.sum((2 - a) ** 2 + (2 - b) ** 2)),
        float(np.sum(2 * np.exp(b - a))),
    )


def crescent(x):
    x1, x2 = x
    u = x1**2 + (x2 - 1) ** 2
    return max(u + x2 - 1, -u + x2 + 1)


def demymalo(x):
    x1, x2 = x
    return max(5 * x1 + x2, -5 * x1 + x2, x1**2 + x2**2 + 4 * x2)


_SHOR_A = np.array(
    [
        [0, 0, 0, 0, 0],
        [2, 1, 1, 1, 3],
        [1, 2, 1, 1, 2],
        [1, 4, 1, 2, 2],
        [3, 2, 1, 0, 1],
        [0, 2, 1, 0, 1],
        [1, 1, 1, 1, 1],
        [1, 0, 1, 2, 1],
        [0, 0, 2, 1, 0],
        [1, 1, 2, 0, 0],
    ],
    dtype=float,
)
_SHOR_B = np.array([1, 5, 10, 2, 4, 3, 1.7, 2.5, 6, 3.5])


def shor(x):
    return float(np.max(_SHOR_B * np.sum((x[None, :] - _SHOR_A) ** 2, axis=1)))


def _maxquad_data():
    n = 10
    i = np.arange(1, n + 1, dtype=float)
    A = np.empty((5, n, n))
    b = np.empty((5, n))
    for k in range(1, 6):
        Ak = np.exp(i[:, None] / i[None, :]) * np.cos(np.outer(i, i)) * math.sin(k)
        Ak = np.triu(Ak, 1)
        Ak = Ak + Ak.T
        Ak[np.diag_indices(n)] = i / 10 * abs(math.sin(k)) + np.sum(np.abs(Ak), axis=1)
        A[k - 1] = Ak
        b[k - 1] = np.exp(i / k) * np.sin(i * k)
    return A, b


_MAXQUAD_A, _MAXQUAD_B = _maxquad_data()


def maxquad(x):
    return float(np.max(np.einsum("i,kij,j->k", x, _MAXQUAD_A, x) - _MAXQUAD_B @ x))


def wong1(x):
    x1, x2, x3, x4, x5, x6, x7 = x
    f1 = (
        (x1 - 10) ** 2 + 5 * (x2 - 12) ** 2 + x3**4 + 3 * (x4 - 11) ** 2
        + 10 * x5**6 + 7 * x6**2 + x7**4 - 4 * x6 * x7 - 10 * x6 - 8 * x7
    )
    return max(
        f1,
        f1 + 10 * (2 * x1**2 + 3 * x2**4 + x3 + 4 * x4**2 + 5 * x5 - 127),
        f1 + 10 * (7 * x1 + 3 * x2 + 10 * x3**2 + x4 - x5 - 282),
        f1 + 10 * (23 * x1 + x2**2 + 6 * x6**2 - 8 * x7 - 196),
        f1 + 10 * (4 * x1**2 + x2**2 - 3 * x1 * x2 + 2 * x3**2 + 5 * x6 - 11 * x7),
    )


# -- registry ------------------------------------------------------------------

@dataclass(frozen=True)
class _Entry:
    build: Callable[[int], ObjectiveProblem]
    dims: Optional[tuple]  # None means any n >= 2
    default_dim: int


_REGISTRY: dict[str, _Entry] = {}


def register(name, build, dims=None, default_dim=None):
    """Add a problem factory. ``build(n)`` must return an :class:`ObjectiveProblem`.

    ``dims`` is a tuple of legal dimensions for fixed-size problems, or None
    for problems scalable to any n >= 2.
    """
    if default_dim is None:
        default_dim = dims[0] if dims else 20
    _REGISTRY[name] = _Entry(build, dims, default_dim)


def registry_names():
    return sorted(_REGISTRY)


def default_dim(name):
    return _lookup(name).default_dim


def _lookup(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; available: {', '.join(registry_names())}") from None


def registry_get(name: str, n: Optional[int] = None) -> ObjectiveProblem:
    entry = _lookup(name)
    if n is None:
        n = entry.default_dim
    if entry.dims is not None and n not in entry.dims:
        raise ValueError(f"problem {name!r} is defined for n in {entry.dims}, got n={n}")
    if entry.dims is None and n < 2:
        raise ValueError(f"problem {name!r} needs n >= 2, got n={n}")
    return entry.build(n)


def _fixed(name, fn, x0, fstar):
    x0 = np.asarray(x0, dtype=float)
    register(name, lambda n: ObjectiveProblem(name, n, x0, fn, fstar), dims=(len(x0),))


_fixed("cb2", cb2, [1.0, -0.1], 1.9522245)
_fixed("crescent", crescent, [-1.5, 2.0], 0.0)
_fixed("demymalo", demymalo, [1.0, 1.0], -3.0)
_fixed("shor", shor, [0, 0, 0, 0, 1], 22.600162)
_fixed("maxquad", maxquad, np.zeros(10), -0.8414083)
_fixed("wong1", wong1, [1, 2, 0, 4, 0, 1, 1], 680.6300573)

register("maxq", lambda n: ObjectiveProblem("maxq", n, _alternating_start(n), maxq, 0.0))
register("maxl", lambda n: ObjectiveProblem("maxl", n, _alternating_start(n), maxl, 0.0))


def _l1hilb(n):
    H = _hilbert(n)
    return ObjectiveProblem("l1hilb", n, np.ones(n), lambda x: np.sum(np.abs(H @ x)), 0.0)


register("l1hilb", _l1hilb)
register("cb3", lambda n: ObjectiveProblem("cb3", n, np.full(n, 2.0), chained_cb3_1, 2.0 * (n - 1)))
register(
    "chained-cb3",
    lambda n: ObjectiveProblem("chained-cb3", n, np.full(n, 2.0), chained_cb3_2, 2.0 * (n - 1)),
)
