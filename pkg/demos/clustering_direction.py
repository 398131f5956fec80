"""
A search direction from failed linesearches
===========================================

At x = (1, ..., 1) the function max_i x_i has every piece active. Probing
+e_i raises f by the full step and probing -e_i leaves it unchanged, so
every coordinate linesearch fails. The quotients left behind are enough to
recover the gradients of the active pieces and a descent direction.
"""

import numpy as np

from nsdfo import SampleSet, compute_direction, kmeans_directional, registry_get

n = 5
f = registry_get("maxl", n)
x = np.ones(n)
alpha = 0.5

# quotients (f(x + a d) - f(x)) / a for d = +e_i and d = -e_i
I = np.eye(n)
D = np.vstack([I, -I])
s = np.array([(f(x + alpha * d) - f(x)) / alpha for d in D])
samples = SampleSet.from_arrays(D, s)
print("quotients:", s)

# %%
# With p = n clusters every sample is explained exactly by one unit vector.
model = kmeans_directional(samples, n)
print("generators:\n", np.round(model.generators, 12))
print("total residual:", model.total_residual)

# %%
# Sweeping p and taking the min-norm point of the hull of the generators
out = compute_direction(samples, epsilon=1e-6)
print("accepted p:", out.p_used)
print("min-norm point:", out.xi_star.point)
print("direction:", out.direction)

# a short step along it lowers f, which no coordinate step could do
for t in (0.01, 0.1, 0.5):
    print(f"f(x + {t} d) = {f(x + t * out.direction):.6f}   (f(x) = {f(x)})")
