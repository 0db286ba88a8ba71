# %% [markdown]
# Replacing X_1^2 by X_1^gamma with gamma < 2 breaks the inequality: the
# quotients of the test family go to zero as the denominator exponent offset
# eps shrinks.

# %%
from hardy_series import extremals as ext
from hardy_series.functionals import HardyParams
from hardy_series.geometry import PointInBall

dom = PointInBall(3)
params = HardyParams(3, 3, 2.0, m=1)
cut = ext.CutoffSpec.for_domain(dom)
offsets = (0.16, 0.08, 0.04, 0.02, 0.01)
rows = ext.sharpness_sweep(params, 1.5, cut, ext.gamma_offset_schedule(1, 1.5, offsets), dom)
for eps, r in zip(offsets, rows):
    print(f"eps={eps:<5} quotient={r.quotient:.5f}  quotient/eps={r.quotient / eps:.4f}")

# %% [markdown]
# quotient/eps settles near a constant, so the quotient is linear in eps.
