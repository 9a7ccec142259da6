# %% [markdown]
# # Largest eigenvalue: random matrices versus a determinant
#
# The top eigenvalue of an n x n GUE-type matrix with entry variance t has
# distribution function det{Phi_t^(i-j+1)(x)}, built from iterated Gaussian
# integrals.  We sample tridiagonal spectra and compare.

# %%
import numpy as np

from interlacing import sample_gue_spectrum, top_eigenvalue_cdf
from interlacing.simulate import block_rng
from interlacing.verify import ks_test

n, t = 4, 1.0
rng = block_rng(seed=1, block=0)
spectra = sample_gue_spectrum(n, t, rng, size=50_000)
top = spectra[:, -1]
print("spectra shape:", spectra.shape)

# %% quantiles side by side
xs = np.quantile(top, [0.1, 0.25, 0.5, 0.75, 0.9])
print(f"{'x':>8} {'empirical':>10} {'exact':>10}")
for x in xs:
    print(f"{x:8.3f} {np.mean(top <= x):10.4f} {top_eigenvalue_cdf(n, x, t):10.4f}")

# %% a formal goodness-of-fit test
res = ks_test(top, lambda x: top_eigenvalue_cdf(n, x, t))
print(f"KS statistic {res.statistic:.4f}, p-value {res.p_value:.3f}")

# %% the same law scales like sqrt(t)
for s in (0.25, 4.0):
    print(f"t={s}: F(2 sqrt t) = {top_eigenvalue_cdf(n, 2 * np.sqrt(s), s):.12f}")
