# %% [markdown]
# Iterated logarithms X_1, X_2, ... and the two sums built from them.
# X_1(t) = 1/(1 - log t) and X_k = X_1(X_{k-1}); every X_k equals 1 at t = 1
# and creeps to zero as t -> 0, each one more slowly than the last.

# %%
import numpy as np

from hardy_series.special_functions import (XSeriesParams, bfun, dxk_dt, eta,
                                            eta_identity_residual, x_stack)

t = np.array([1.0, 0.5, 1e-3, 1e-30, 1e-300])
xs = x_stack(t, 4)
for i, row in enumerate(xs, 1):
    print(f"X_{i}:", np.array2string(row, precision=4))

# %% [markdown]
# The derivative rule d/dt X_i^b = (b/t) X_1 ... X_{i-1} X_i^(1+b), checked
# against a central difference.

# %%
t0, h = 0.01, 1e-7
for i in (1, 2, 3):
    fd = (x_stack(t0 + h, i)[-1] ** 2 - x_stack(t0 - h, i)[-1] ** 2) / (2 * h)
    print(i, dxk_dt(i, 2.0, t0), fd)

# %% [markdown]
# eta = X_1 + X_1 X_2 + ... and B = X_1^2 + X_1^2 X_2^2 + ... satisfy
# t eta' = (B + eta^2)/2, and 1 <= eta^2/B <= m.

# %%
p = XSeriesParams(4)
grid = np.geomspace(1e-200, 0.99, 9)
print("residual:", eta_identity_residual(p, grid).max())
print("eta^2/B :", np.array2string(eta(p, grid) ** 2 / bfun(p, grid), precision=3))
