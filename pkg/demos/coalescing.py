# %% [markdown]
# # Coalescing Brownian motions
#
# Particles started at z move as independent Brownian motions until they
# meet, then stick.  The probability that every particle ends below its
# level z2_i is an n x n determinant of Gaussian distribution functions.

# %%
import numpy as np

from interlacing import SimConfig, coalescing_cdf, simulate_coalescing

z = (0.0, 0.5, 1.2)
batch = simulate_coalescing(z, SimConfig(1.0, 1e-3, 20_000, seed=4))
owners = batch.extras["owner"]
print("fraction of paths with all three merged:", np.mean(owners[:, -1] == 0))

# %%
print(f"{'levels':>22} {'empirical':>10} {'exact':>8} {'SE':>7}")
for z2 in [(0.0, 0.5, 1.2), (-0.5, 0.5, 1.5), (0.5, 0.5, 0.5), (1.0, 1.5, 2.5)]:
    emp = np.mean(np.all(batch.terminal <= np.array(z2), axis=1))
    exact = coalescing_cdf(z, z2, 1.0)
    se = np.sqrt(exact * (1 - exact) / len(batch.terminal))
    print(f"{str(z2):>22} {emp:10.4f} {exact:8.4f} {se:7.4f}")

# %% two particles from one point never separate
same = simulate_coalescing((0.0, 0.0), SimConfig(1.0, 1e-2, 1000, seed=5))
print("identical start stays merged:", bool(np.all(same.column("z1") == same.column("z2"))))
