# %% [markdown]
# # A tour of the closed-form densities

# %%
import numpy as np

from interlacing import (entrance_mu, entrance_nu, iterated_phi, km_density, lambda_kernel,
                         q_density, q_density_dual, r_density)

# %% iterated Gaussian integrals: order 0 is the heat kernel, order 1 the CDF
y = np.linspace(-2, 2, 5)
for n in (-1, 0, 1, 2):
    print(f"Phi^({n:2d})_1:", np.round(iterated_phi(n, y, 1.0), 6))

# %% killed Brownian motions in the Weyl chamber
print("p_1((0,1),(0,1)) =", km_density([0, 1], [0, 1], 1.0))
print("starting on the wall gives zero:", km_density([0, 0], [0, 1], 1.0))

# %% the interlaced pair: a (2n+1) x (2n+1) determinant, and its dual
w, w2 = ([-1.0, 1.0], [0.0]), ([-0.5, 0.8], [0.3])
print("q(w, w2) =", q_density(w, w2, 1.0), " dual q^(w2, w) =", q_density_dual(w2, w, 1.0))

# %% entrance laws factor through the intertwining kernel
x, yy = np.array([-1.0, 0.2, 1.5]), np.array([-0.3, 0.9])
print("nu =", entrance_nu((x, yy), 1.0), " mu * lambda =",
      entrance_mu(x, 1.0) * lambda_kernel(x, yy))

# %% the corner process of the Gelfand-Tsetlin cone
print("r_1((0,1),(0,1)) =", r_density([0, 1], [0, 1], 1.0))
