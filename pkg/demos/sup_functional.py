# %% [markdown]
# # Last-passage percolation and the largest eigenvalue
#
# For n independent Brownian motions, the supremum over
# 0 = t_0 <= ... <= t_n = 1 of sum_i (B_i(t_i) - B_i(t_{i-1})) has the law
# of the largest GUE eigenvalue.  On a time grid the maximum is biased
# low by O(sqrt(dt)); a Brownian-bridge correction removes most of it.

# %%
import numpy as np

from interlacing import SimConfig, simulate_sup_functional, top_eigenvalue_cdf
from interlacing.verify import ks_test

n = 3
cdf = lambda v: top_eigenvalue_cdf(n, v, 1.0)
print(f"{'dt':>8} {'grid KS':>9} {'bridge KS':>10}")
for dt in (1e-1, 1e-2, 1e-3):
    b = simulate_sup_functional(n, SimConfig(1.0, dt, 20_000, seed=3))
    grid = ks_test(b.extras["grid"][:, -1], cdf).statistic
    bridge = ks_test(b.column(f"m{n}"), cdf).statistic
    print(f"{dt:8.0e} {grid:9.4f} {bridge:10.4f}")

# %% the grid value is a true supremum of the discretized problem
from interlacing import sup_functional

inc = np.random.default_rng(0).standard_normal((n, 1000)) * np.sqrt(1e-3)
print("grid sup-functional of one sample:", sup_functional(inc))
