"""
CS-DFN and its clustering variant on a few problems
===================================================

Both solvers share the coordinate and dense-direction searches. The fast
variant adds one extra search whenever the steps have become small.
"""

from nsdfo import SolverConfig, registry_get, run_csdfn, run_fast_csdfn

config = SolverConfig(budget=20_000)

for name, n in [("cb2", 2), ("maxl", 10), ("l1hilb", 8), ("chained-cb3", 6)]:
    problem = registry_get(name, n)
    print(f"{name} (n={n}), f* = {problem.known_optimum:g}")
    for solve in (run_csdfn, run_fast_csdfn):
        rec = solve(problem, config)
        gap = rec.final_f - problem.known_optimum
        print(f"  {rec.solver:11s} f - f* = {gap:9.2e}  evals = {rec.nfev:6d}  stop: {rec.reason}")

# %%
# The evaluation history is the best-so-far value at every improvement
rec = run_fast_csdfn(registry_get("maxl", 10), config)
for nf, fbest in rec.history[:8]:
    print(f"{nf:5d}  {fbest:.4g}")
