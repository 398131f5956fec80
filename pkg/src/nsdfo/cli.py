"""Command line entry point: ``nsdfo {solve,bench,profiles,problems}``.

Exit codes: 0 ok, 1 runtime failure, 2 usage error. The output directory is
``--out`` if given, else ``$NSDFO_OUT``, else ``./results``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import yaml

from . import bench
from .problems import default_dim, registry_get, registry_names
from .solver import SOLVERS, SolverConfig

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load_config(path=None, **overrides):
    """SolverConfig from a flat YAML mapping, with non-None ``overrides`` applied on top."""
    values = {}
    if path is not None:
        try:
            doc = yaml.safe_load(Path(path).read_text()) or {}
        except OSError as exc:
            raise UsageError(f"cannot read config file {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError(f"config file {path} must be a flat key: value mapping")
        values.update(doc)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SolverConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad solver configuration: {exc}") from None


def _out_dir(args):
    return Path(args.out or os.environ.get("NSDFO_OUT") or "results")


def _parse_problem(token):
    name, _, dim = token.partition(":")
    if name not in registry_names():
        raise UsageError(f"unknown problem {name!r}; available: {', '.join(registry_names())}")
    n = int(dim) if dim else default_dim(name)
    try:
        registry_get(name, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return name, n


def cmd_solve(args):
    name, n = _parse_problem(args.problem if args.dim is None else f"{args.problem}:{args.dim}")
    config = load_config(args.config, seed=args.seed, budget=args.budget)
    record = SOLVERS[args.solver](registry_get(name, n), config)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}-n{n}__{args.solver}.json"
    path.write_text(record.to_json())
    print(f"problem={name} n={n} solver={args.solver}")
    print(f"final f = {record.final_f:.10g}")
    print(f"evaluations = {record.nfev}")
    print(f"reason = {record.reason}")
    print(f"record written to {path}")
    return EXIT_OK


def _problem_list(args):
    if not args.problems:
        return list(bench.CORE_PROBLEMS)
    return [_parse_problem(p) for p in args.problems.split(",") if p]


def cmd_bench(args):
    problems = _problem_list(args)
    solvers = args.solvers.split(",")
    for s in solvers:
        if s not in SOLVERS:
            raise UsageError(f"unknown solver {s!r}; available: {', '.join(sorted(SOLVERS))}")
    config = load_config(args.config, seed=args.seed, budget=args.budget)
    taus = args.tau or list(bench.STANDARD_TAUS)
    result = bench.run_suite(problems, solvers, config, taus, _out_dir(args), jobs=args.jobs)
    m = result.manifest
    print(f"{len(result.records)} runs, {len(m['failures'])} failures, {len(result.paths)} profile files")
    for flag in m["flags"]:
        print(f"flag: {flag}")
    if m["failures"]:
        print(f"warning: {len(m['failures'])} runs failed, see manifest.json", file=sys.stderr)
    print(f"config hash {m['config_hash']}")
    return EXIT_OK


def cmd_profiles(args):
    try:
        manifest, records = bench.load_bundle(args.bundle)
    except bench.BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for f in exc.files:
            print(f"  {f}", file=sys.stderr)
        return EXIT_FAILURE
    taus = args.tau or manifest.get("taus") or list(bench.STANDARD_TAUS)
    out = Path(args.out) if args.out else Path(args.bundle)
    paths = bench.write_profiles(records, taus, out)
    print(f"{len(paths)} profile files written to {out}")
    return EXIT_OK


def cmd_problems(args):
    for name in registry_names():
        p = registry_get(name)
        print(json.dumps({"name": name, "dim": p.dim, "f_star": p.known_optimum}))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="nsdfo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat YAML file with solver settings")
        p.add_argument("--out", help="output directory (default $NSDFO_OUT or ./results)")
        p.add_argument("--seed", type=int)
        p.add_argument("--budget", type=int, help="max function evaluations per run")

    p = sub.add_parser("solve", help="run one solver on one problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--solver", default="fast-csdfn", choices=sorted(SOLVERS))
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a problem x solver grid and write profiles")
    p.add_argument("--problems", help="comma separated name[:n] list (default: core set)")
    p.add_argument("--solvers", default="csdfn,fast-csdfn")
    p.add_argument("--tau", type=float, action="append", help="precision level, repeatable")
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profiles", help="recompute profiles from a results bundle")
    p.add_argument("bundle")
    p.add_argument("--tau", type=float, action="append")
    p.add_argument("--out", help="output directory (default: the bundle)")
    p.set_defaults(func=cmd_profiles)

    p = sub.add_parser("problems", help="inspect the problem registry")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_problems)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nsdfo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nsdfo: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
