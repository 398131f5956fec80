"""Linesearch derivative-free solvers for nonsmooth unconstrained problems.

``run_csdfn`` cycles continuous searches along the signed coordinate
directions and, once every coordinate step is small, along one element of a
dense sequence of unit directions. ``run_fast_csdfn`` adds, after that dense
search, a search along the direction built by :func:`compute_direction`
from the difference quotients gathered by the failed searches.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.stats import norm, qmc

from .clustering import SampleSet
from .direction import compute_direction
from .linesearch import LineSearchConfig, continuous_search
from .minnorm import SpdMetric
from .problems import BudgetExhausted, EvalCounter, ObjectiveProblem, evaluate_counted

__all__ = [
    "SolverConfig",
    "SolverState",
    "RunRecord",
    "dense_direction",
    "build_metric",
    "run_fast_csdfn",
    "run_csdfn",
    "SOLVERS",
]

log = logging.getLogger(__name__)

SIGMA_MIN, SIGMA_MAX = 1e-6, 1e6


@dataclass
class SolverConfig:
    theta: float = 0.5
    eta: float = 1e-3
    gamma: float = 1e-6
    delta: float = 0.5
    alpha_max: float = 1e3
    # None -> max(1, |x0_i|) per coordinate
    alpha0_coord: Optional[float] = None
    alpha0_dense: float = 1.0
    # None -> 1e-4 * max(1, sum of squared quotients)
    epsilon_cluster: Optional[float] = None
    h_max: int = 20
    n_restarts: int = 5
    seed: int = 0
    # None -> 20000 * n
    budget: Optional[int] = None
    stop_alpha: float = 1e-7
    metric_mode: str = "identity"
    trace: bool = False

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.stop_alpha <= 0:
            raise ValueError("stop_alpha must be positive")
        if self.metric_mode not in ("identity", "diagonal-estimate"):
            raise ValueError(f"unknown metric_mode {self.metric_mode!r}")
        LineSearchConfig(self.gamma, self.delta, self.alpha_max)

    @property
    def linesearch(self):
        return LineSearchConfig(self.gamma, self.delta, self.alpha_max)

    def budget_for(self, n):
        return self.budget if self.budget is not None else 20000 * n

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise ValueError(f"unknown solver config keys: {', '.join(sorted(unknown))}")
        return cls(**values)


@dataclass
class SolverState:
    x: np.ndarray
    fx: float
    coord_dirs: np.ndarray  # row i is +e_i or -e_i
    coord_steps: np.ndarray
    dense_step: float
    samples: SampleSet = field(default_factory=SampleSet)
    metric: Optional[SpdMetric] = None
    k: int = 0
    dense_index: int = 0


@dataclass
class RunRecord:
    problem: str
    solver: str
    n: int
    seed: int
    config: dict
    history: list  # [[nf, f_best], ...], closed by an entry at the final count
    final_x: list
    final_f: float
    reason: str
    trace: list = field(default_factory=list, repr=False)

    @property
    def nfev(self):
        return self.history[-1][0] if self.history else 0

    @property
    def f0(self):
        return self.history[0][1]

    def to_json(self):
        doc = {
            "problem": self.problem,
            "solver": self.solver,
            "n": self.n,
            "seed": self.seed,
            "config": self.config,
            "history": [[int(k), float(v)] for k, v in self.history],
            "final_x": [float(v) for v in self.final_x],
            "final_f": float(self.final_f),
            "reason": self.reason,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        missing = {"problem", "solver", "n", "history", "final_f", "reason"} - set(doc)
        if missing:
            raise ValueError(f"run record is missing {', '.join(sorted(missing))}")
        return cls(
            problem=doc["problem"],
            solver=doc["solver"],
            n=int(doc["n"]),
            seed=int(doc.get("seed", 0)),
            config=doc.get("config", {}),
            history=[[int(k), float(v)] for k, v in doc["history"]],
            final_x=doc.get("final_x", []),
            final_f=float(doc["final_f"]),
            reason=doc["reason"],
        )


@lru_cache(maxsize=64)
def _halton(n):
    return qmc.Halton(d=n, scramble=False)


def dense_direction(index, n):
    """Unit vector number ``index`` of a sequence dense on the unit sphere in R^n.

    Halton points (the origin skipped) are pushed through the Gaussian
    inverse CDF and normalized.
    """
    if index < 0:
        raise ValueError("index must be non-negative")
    gen = _halton(n)
    # solvers walk the sequence in order, so only rewind on out-of-order access
    if gen.num_generated != index + 1:
        gen.reset()
        gen.fast_forward(index + 1)
    z = norm.ppf(gen.random(1)[0])
    nz = np.linalg.norm(z)
    if nz == 0.0:
        # only (1/2, ..., 1/2) maps to zero; n = 1 hits it at index 0
        z = np.ones(n)
        nz = np.sqrt(n)
    return z / nz


def build_metric(state, mode="identity"):
    """Symmetric positive definite matrix for the direction subproblem.

    ``identity`` gives the steepest-descent form. ``diagonal-estimate`` uses
    second differences ``(f(y+a e_i) - 2 f(y) + f(y-a e_i)) / a^2`` recovered
    from the most recent failed coordinate search stored in the sample set,
    clamped to [1e-6, 1e6]; coordinates without a probe get 1.
    """
    n = state.x.size
    if mode == "identity":
        return SpdMetric.identity(n)
    if mode != "diagonal-estimate":
        raise ValueError(f"unknown metric mode {mode!r}")
    diag = np.full(n, np.nan)
    pairs = state.samples.pairs
    # failures are stored as consecutive (p, -p) pairs sharing one step
    for j in range(len(pairs) - 2, -1, -1):
        a, b = pairs[j], pairs[j + 1]
        if a.alpha is None or a.alpha != b.alpha or not np.array_equal(a.d, -b.d):
            continue
        nz = np.flatnonzero(a.d)
        if nz.size != 1 or abs(a.d[nz[0]]) != 1.0:
            continue
        i = nz[0]
        if np.isnan(diag[i]):
            diag[i] = (a.s + b.s) / a.alpha
    diag = np.where(np.isnan(diag), 1.0, diag)
    return SpdMetric(np.diag(np.clip(diag, SIGMA_MIN, SIGMA_MAX)))


def _initial_state(problem, config, fx0):
    x0 = np.array(problem.start_point, dtype=float)
    n = problem.dim
    if config.alpha0_coord is None:
        steps = np.maximum(1.0, np.abs(x0))
    else:
        steps = np.full(n, float(config.alpha0_coord))
    return SolverState(x0, fx0, np.eye(n), steps, float(config.alpha0_dense))


def _run(problem: ObjectiveProblem, config: SolverConfig, fast: bool, name: str):
    n = problem.dim
    counter = EvalCounter(budget=config.budget_for(n))
    ls = config.linesearch
    trace = []

    def f(x):
        return evaluate_counted(problem, counter, x)

    def search(step, y, fy, p, samples):
        res = continuous_search(step, y, fy, p, samples, ls, f)
        if config.trace and res.alpha > 0:
            trace.append((y.copy(), res.direction.copy(), res.alpha, fy, res.f_new))
        return res

    reason = "budget"
    state = None
    try:
        state = _initial_state(problem, config, f(problem.start_point))
        while True:
            if max(state.coord_steps.max(), state.dense_step) <= config.stop_alpha:
                reason = "stationary"
                break
            _iterate(state, config, fast, search)
    except BudgetExhausted:
        reason = "budget"

    history = [[k, v] for k, v in counter.history]
    # close the history at the last evaluation so it also records the cost
    if history and history[-1][0] < counter.count:
        history.append([counter.count, history[-1][1]])
    final_x = counter.best_x if counter.best_x is not None else np.array(problem.start_point)
    return RunRecord(
        problem=problem.name,
        solver=name,
        n=n,
        seed=config.seed,
        config=config.to_dict(),
        history=history,
        final_x=final_x.tolist(),
        final_f=counter.best_value,
        reason=reason,
        trace=trace,
    )


def _iterate(state, config, fast, search):
    n = state.x.size
    y, fy = state.x.copy(), state.fx
    samples = state.samples
    old_steps = state.coord_steps.copy()
    accepted = np.zeros(n)

    for i in range(n):
        res = search(old_steps[i], y, fy, state.coord_dirs[i], samples)
        samples = res.samples
        state.coord_dirs[i] = res.direction
        if res.alpha == 0:
            state.coord_steps[i] = config.theta * old_steps[i]
        else:
            accepted[i] = res.alpha
            state.coord_steps[i] = res.alpha
            y = y + res.alpha * res.direction
            fy = res.f_new
            # keep state consistent if the budget runs out mid-iteration
            state.x, state.fx = y, fy

    if max(accepted.max(), old_steps.max()) <= config.eta:
        dense_step = state.dense_step
        d = dense_direction(state.dense_index, n)
        state.dense_index += 1
        res = search(dense_step, y, fy, d, samples)
        samples = res.samples
        if res.alpha == 0:
            state.dense_step = config.theta * dense_step
        else:
            state.dense_step = res.alpha
            y = y + res.alpha * res.direction
            fy = res.f_new
        state.x, state.fx = y, fy

        if fast:
            state.samples = samples
            state.metric = build_metric(state, config.metric_mode)
            out = compute_direction(
                samples,
                state.metric,
                epsilon=config.epsilon_cluster,
                h_max=config.h_max,
                seed=config.seed + state.k,
                n_restarts=config.n_restarts,
            )
            if out.found:
                res = search(dense_step, y, fy, out.direction, samples)
                if res.alpha > 0:
                    y = y + res.alpha * res.direction
                    fy = res.f_new
                    samples = SampleSet()
    state.x, state.fx = y, fy
    state.samples = samples
    state.k += 1


def run_fast_csdfn(problem, config=None):
    return _run(problem, config or SolverConfig(), True, "fast-csdfn")


def run_csdfn(problem, config=None):
    return _run(problem, config or SolverConfig(), False, "csdfn")


SOLVERS = {"fast-csdfn": run_fast_csdfn, "csdfn": run_csdfn}
