"""Solver benchmarking: convergence test, performance profiles and data profiles.

A problem ``p`` counts as solved by solver ``s`` at the first evaluation
``t_ps`` where the best value so far satisfies

    f <= f_L + tau * (f(x0) - f_L)

with ``f_L`` the best final value reached by any compared solver. From the
``t_ps`` table,

    rho_s(a) = |{p : t_ps / min_i t_pi <= a}| / |P|
    d_s(k)   = |{p : t_ps / (n_p + 1) <= k}| / |P| .
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .problems import default_dim, registry_get
from .solver import SOLVERS, RunRecord, SolverConfig

__all__ = [
    "ConvergenceTest",
    "ProfileCurve",
    "solved_at",
    "solve_table",
    "performance_profile",
    "data_profile",
    "run_suite",
    "load_bundle",
    "write_profiles",
    "CORE_PROBLEMS",
    "STANDARD_TAUS",
]

log = logging.getLogger(__name__)

STANDARD_TAUS = (1e-1, 1e-3, 1e-5)

# the desk-scale problem set: (name, n)
CORE_PROBLEMS = (
    ("cb2", 2),
    ("crescent", 2),
    ("demymalo", 2),
    ("shor", 5),
    ("wong1", 7),
    ("maxquad", 10),
    ("maxl", 10),
    ("maxq", 20),
    ("l1hilb", 20),
    ("cb3", 20),
)


@dataclass(frozen=True)
class ConvergenceTest:
    tau: float
    f0: float
    fL: float

    @property
    def threshold(self):
        return self.fL + self.tau * (self.f0 - self.fL)


def solved_at(record, test) -> Optional[int]:
    """First evaluation count whose best-so-far value passes ``test``, or None."""
    if not record.history:
        raise ValueError("record has an empty history")
    thr = test.threshold
    for nf, fbest in record.history:
        if fbest <= thr:
            return int(nf)
    return None


@dataclass
class ProfileCurve:
    solver: str
    abscissae: np.ndarray
    ordinates: np.ndarray
    # per-problem statistic (ratio or simplex gradients), inf when unsolved
    values: np.ndarray = field(repr=False)

    def __call__(self, x):
        """Exact profile value at ``x``."""
        if self.values.size == 0:
            return 0.0
        return np.count_nonzero(self.values <= x) / self.values.size


def _key(record):
    return (record.problem, record.n)


def solve_table(records, tau):
    """t_ps for every problem and solver.

    Returns ``(table, dims, dropped)``: ``table[(problem, n)][solver]`` is the
    solve index or None, ``dims`` maps problems to n_p, and ``dropped`` lists
    problems no solver solved (only possible if every run failed).
    """
    by_problem = {}
    solvers = []
    for rec in records:
        by_problem.setdefault(_key(rec), {})[rec.solver] = rec
        if rec.solver not in solvers:
            solvers.append(rec.solver)
    solvers.sort()
    table, dims, dropped = {}, {}, []
    for key in sorted(by_problem):
        cells = by_problem[key]
        fL = min(r.final_f for r in cells.values())
        row = {}
        for s in solvers:
            rec = cells.get(s)
            row[s] = None if rec is None else solved_at(rec, ConvergenceTest(tau, rec.f0, fL))
        if all(t is None for t in row.values()):
            dropped.append(key)
            warnings.warn(f"problem {key[0]} (n={key[1]}) is solved by no solver; dropped from profiles")
            continue
        table[key] = row
        dims[key] = key[1]
    return table, dims, dropped


def _ratios(table):
    out = {}
    for key, row in table.items():
        best = min(t for t in row.values() if t is not None)
        out[key] = {s: (math.inf if t is None else t / best) for s, t in row.items()}
    return out


def _curve(solver, values, grid):
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    xs = np.unique(np.concatenate([grid, finite]))
    ys = np.array([np.count_nonzero(values <= x) for x in xs]) / max(values.size, 1)
    return ProfileCurve(solver, xs, ys, values)


def performance_profile(records, tau, n_grid=50):
    table, _, _ = solve_table(records, tau)
    ratios = _ratios(table)
    solvers = sorted({s for row in table.values() for s in row})
    if len(solvers) < 2:
        warnings.warn("performance profile with a single solver: all ratios are 1")
    finite = [r for row in ratios.values() for r in row.values() if math.isfinite(r)]
    top = max(finite, default=1.0)
    grid = np.logspace(0, math.log10(top), n_grid) if top > 1 else np.array([1.0])
    return [_curve(s, [ratios[k][s] for k in sorted(ratios)], grid) for s in solvers]


def data_profile(records, tau, budget_units=None, n_grid=50):
    """Data profiles; ``budget_units`` is the largest kappa plotted (default: largest solve)."""
    table, dims, _ = solve_table(records, tau)
    solvers = sorted({s for row in table.values() for s in row})
    kappa = {
        k: {s: (math.inf if t is None else t / (dims[k] + 1)) for s, t in row.items()}
        for k, row in table.items()
    }
    if budget_units is None:
        finite = [v for row in kappa.values() for v in row.values() if math.isfinite(v)]
        budget_units = max(finite, default=1.0)
    grid = np.linspace(0.0, budget_units, n_grid)
    return [_curve(s, [kappa[k][s] for k in sorted(kappa)], grid) for s in solvers]


# -- output ----------------------------------------------------------------------

def _tau_label(tau):
    return f"{tau:g}"


def profile_csv(records, tau, kind):
    """CSV text with one row per (problem, solver) cell: problem,solver,n,tau,t_ps,ratio."""
    table, dims, _ = solve_table(records, tau)
    stats = _ratios(table) if kind == "perf" else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem", "solver", "n", "tau", "t_ps", "ratio"])
    for key in sorted(table):
        for s in sorted(table[key]):
            t = table[key][s]
            if kind == "perf":
                ratio = stats[key][s]
            else:
                ratio = math.inf if t is None else t / (dims[key] + 1)
            w.writerow([key[0], s, key[1], _tau_label(tau), "" if t is None else t, repr(float(ratio))])
    return buf.getvalue()


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def profile_svg(curves, title, xlabel, logx=False):
    """Self-contained SVG step plot; curve data is embedded as comments."""
    W, H, L, R, T, B = 640, 420, 60, 150, 40, 50
    pw, ph = W - L - R, H - T - B
    xs_all = np.concatenate([c.abscissae for c in curves]) if curves else np.array([0.0, 1.0])

    def tx(x):
        return math.log2(x) if logx else x

    lo = tx(float(xs_all.min())) if xs_all.size else 0.0
    hi = tx(float(xs_all.max())) if xs_all.size else 1.0
    if hi <= lo:
        hi = lo + 1.0

    def px(x):
        return L + (tx(x) - lo) / (hi - lo) * pw

    def py(y):
        return T + (1.0 - y) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{L + pw / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = py(frac)
        out.append(f'<line x1="{L - 4}" y1="{y:.2f}" x2="{L}" y2="{y:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{L - 8}" y="{y + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{frac:g}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        v = lo + frac * (hi - lo)
        label = f"{2**v:.3g}" if logx else f"{v:.3g}"
        x = L + frac * pw
        out.append(f'<line x1="{x:.2f}" y1="{T + ph}" x2="{x:.2f}" y2="{T + ph + 4}" stroke="black"/>')
        out.append(
            f'<text x="{x:.2f}" y="{T + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{label}</text>'
        )
    out.append(
        f'<text x="{L + pw / 2}" y="{H - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    for idx, c in enumerate(curves):
        color = _COLORS[idx % len(_COLORS)]
        pts = []
        prev = None
        for x, y in zip(c.abscissae, c.ordinates):
            if prev is not None:
                pts.append(f"{px(x):.2f},{py(prev):.2f}")
            pts.append(f"{px(x):.2f},{py(y):.2f}")
            prev = y
        data = " ".join(f"{x!r}:{y!r}" for x, y in zip(c.abscissae.tolist(), c.ordinates.tolist()))
        out.append(f"<!-- data solver={c.solver} {data} -->")
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{" ".join(pts)}"/>')
        ly = T + 16 + 18 * idx
        out.append(f'<line x1="{L + pw + 12}" y1="{ly}" x2="{L + pw + 36}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{L + pw + 42}" y="{ly + 4}" font-family="sans-serif" font-size="12">{c.solver}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_profiles(records, taus, out_dir):
    """Write perf/data CSV and SVG files for every tau. Returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for tau in taus:
        label = _tau_label(tau)
        perf = performance_profile(records, tau)
        data = data_profile(records, tau)
        for kind, curves, xlabel, logx in (
            ("perf", perf, "performance ratio (log2 scale)", True),
            ("data", data, "simplex gradients (n_p + 1 evaluations)", False),
        ):
            csv_path = out_dir / f"{kind}_tau{label}.csv"
            csv_path.write_text(profile_csv(records, tau, kind))
            svg_path = out_dir / f"{kind}_tau{label}.svg"
            title = f"{'Performance' if kind == 'perf' else 'Data'} profile, tau = {label}"
            svg_path.write_text(profile_svg(curves, title, xlabel, logx))
            paths += [csv_path, svg_path]
    return paths


# -- suite --------------------------------------------------------------------------

def _record_name(problem, n, solver):
    return f"{problem}-n{n}__{solver}.json"


def _run_cell(args):
    problem, n, solver, config_dict = args
    try:
        rec = SOLVERS[solver](registry_get(problem, n), SolverConfig.from_dict(config_dict))
        return problem, n, solver, rec, None
    except Exception as exc:  # one failing cell must not sink the suite
        return problem, n, solver, None, f"{type(exc).__name__}: {exc}"


def config_hash(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


@dataclass
class SuiteResult:
    records: list
    manifest: dict
    paths: list


def _flags(records, taus, solvers):
    flags = []
    if "fast-csdfn" not in solvers or "csdfn" not in solvers:
        return flags
    for tau in taus:
        curves = {c.solver: c for c in data_profile(records, tau)}
        if "fast-csdfn" in curves and "csdfn" in curves:
            fast, base = curves["fast-csdfn"].ordinates[-1], curves["csdfn"].ordinates[-1]
            if fast < base:
                flags.append(
                    f"tau={_tau_label(tau)}: fast-csdfn data profile {fast:.3f} below csdfn {base:.3f} at final kappa"
                )
    return flags


def run_suite(problems, solvers, config=None, taus=STANDARD_TAUS, out_dir="results", jobs=1):
    """Run every (problem, solver) pair and write records, manifest and profiles.

    ``problems`` holds names or ``(name, n)`` pairs. Output layout::

        out_dir/records/<problem>-n<n>__<solver>.json
        out_dir/manifest.json
        out_dir/{perf,data}_tau<tau>.{csv,svg}
    """
    config = config or SolverConfig()
    grid = []
    for p in problems:
        name, n = (p, default_dim(p)) if isinstance(p, str) else p
        registry_get(name, n)  # validate early
        grid.append((name, int(n)))
    solvers = list(solvers)
    for s in solvers:
        if s not in SOLVERS:
            raise KeyError(f"unknown solver {s!r}; available: {', '.join(sorted(SOLVERS))}")
    warn_list = []
    if len(solvers) < 2:
        msg = "single solver: performance ratios are all 1, only the data profile is informative"
        warnings.warn(msg)
        warn_list.append(msg)

    out_dir = Path(out_dir)
    rec_dir = out_dir / "records"
    rec_dir.mkdir(parents=True, exist_ok=True)
    cfg = config.to_dict()
    cells = [(name, n, s, cfg) for name, n in grid for s in solvers]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]

    records, failures, files = [], [], []
    for name, n, s, rec, err in sorted(results, key=lambda r: (r[0], r[1], r[2])):
        if err is not None:
            failures.append({"problem": name, "n": n, "solver": s, "error": err})
            log.warning("run %s n=%d %s failed: %s", name, n, s, err)
            continue
        fname = _record_name(name, n, s)
        (rec_dir / fname).write_text(rec.to_json())
        files.append(f"records/{fname}")
        records.append(rec)

    paths = write_profiles(records, taus, out_dir) if records else []
    identity = {"grid": [list(g) for g in grid], "solvers": solvers, "config": cfg, "taus": list(taus)}
    manifest = {
        **identity,
        "seed": config.seed,
        "config_hash": config_hash(identity),
        "records": files,
        "failures": failures,
        "warnings": warn_list,
        "flags": _flags(records, taus, solvers),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return SuiteResult(records, manifest, paths)


class BundleError(RuntimeError):
    def __init__(self, message, files):
        super().__init__(f"{message}: {', '.join(files)}")
        self.files = files


def load_bundle(bundle_dir):
    """Read the manifest and every run record of a results bundle.

    Raises :class:`BundleError` listing missing or unreadable record files.
    """
    bundle_dir = Path(bundle_dir)
    manifest_path = bundle_dir / "manifest.json"
    if not manifest_path.is_file():
        raise BundleError("missing manifest", [str(manifest_path)])
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError:
        raise BundleError("corrupt manifest", [str(manifest_path)]) from None
    records, bad = [], []
    for rel in manifest.get("records", []):
        path = bundle_dir / rel
        try:
            records.append(RunRecord.from_json(path.read_text()))
        except (OSError, ValueError, KeyError):
            bad.append(str(path))
    if bad:
        raise BundleError("missing or corrupt run records", bad)
    return manifest, records
