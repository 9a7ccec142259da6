# %% [markdown]
# # A Dyson-driven interlaced pair
#
# Y is a non-colliding (Dyson) Brownian motion with n particles.  X has
# n + 1 particles, each an independent Brownian motion reflected off its Y
# neighbours so that x_1 <= y_1 <= x_2 <= ... <= x_{n+1}.  Started from the
# origin, X is again a Dyson process: its time-t law is the GUE law with
# n + 1 particles.

# %%
import numpy as np

from interlacing import SimConfig, ordered_eigenvalue_cdf, simulate_interlaced_pair_plus
from interlacing.verify import ks_test

n, t = 1, 1.0
cfg = SimConfig(horizon_t=t, dt=1e-3, n_paths=20_000, seed=2)
batch = simulate_interlaced_pair_plus(None, None, cfg, n=n)
print(batch.columns, batch.terminal.shape)
print("start used:", batch.config["start"])

# %% each X coordinate against the k-th smallest eigenvalue
for k in range(1, n + 2):
    res = ks_test(batch.column(f"x{k}"), lambda v: ordered_eigenvalue_cdf(n + 1, k, v, t))
    print(f"x{k}: KS {res.statistic:.4f}  p={res.p_value:.3f}")

# %% interlacing holds on every path, and the pushing is one-sided
x, y = batch.terminal[:, :n + 1], batch.terminal[:, n + 1:]
print("interlaced on all paths:", bool(np.all((x[:, :-1] <= y) & (y <= x[:, 1:]))))
lm, lp = batch.extras["local_time_minus"], batch.extras["local_time_plus"]
print("mean local time pushed up / down:", lm.mean(axis=0), lp.mean(axis=0))
