# %% [markdown]
# The constant 1/4 in front of the first series term, squeezed from both sides
# for p = 2 around a point in the 3-ball.
#
# From below: the smallest Rayleigh quotient over nested finite-element spaces.
# From above: exact quotients of an explicit family of near-extremals.

# %%
from hardy_series import extremals as ext
from hardy_series import minimizer as mz
from hardy_series.functionals import HardyParams, theorem_constant
from hardy_series.geometry import BallBoundary, PointInBall

dom = PointInBall(3)
params = HardyParams(3, 3, 2.0, m=1)
print("theorem constant:", theorem_constant(params))

# %%
for row in mz.convergence_table(dom, params, dofs=500, refinements=2):
    print(f"{row.dofs:5d} dofs  min quotient {row.value:.12f}  ({row.seconds:.3f}s)")

# %% [markdown]
# The discrete minimum sits above 1/4 by roughly pi^2/L^2, where L is the
# length of the mesh in the doubly logarithmic variable. The sweep below
# approaches 1/4 as alpha_1 -> 0.

# %%
cut = ext.CutoffSpec.for_domain(dom)
for pt in ext.sharpness_sweep(params, 2.0, cut, ext.ordered_schedule(1), dom):
    print(f"alpha={pt.alpha}  quotient {pt.quotient:.6f}")

# %% [markdown]
# Same squeeze with K the boundary of the ball (k = 1).

# %%
bdom, bparams = BallBoundary(3), HardyParams(3, 1, 2.0, m=1)
print([round(r.value, 10) for r in mz.convergence_table(bdom, bparams, dofs=500, refinements=1)])
print([round(p.quotient, 6) for p in ext.sharpness_sweep(
    bparams, 2.0, ext.CutoffSpec.for_domain(bdom), ext.ordered_schedule(1), bdom)])
