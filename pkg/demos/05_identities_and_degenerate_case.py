# %% [markdown]
# Integration-by-parts identity for the auxiliary integrals: as alpha_1 -> 0
# the integral A_1 blows up like 1/alpha_1, while
# alpha_1 A_1 - sum_j (1 - alpha_j) Gamma_1j stays bounded. The residual equals
# an integral over the cutoff transition zone, computed independently here.

# %%
from hardy_series import extremals as ext
from hardy_series import minimizer as mz
from hardy_series.functionals import HardyParams
from hardy_series.geometry import PointInBall

dom = PointInBall(3)
params = HardyParams(3, 3, 2.0, m=2)
cut = ext.CutoffSpec.for_domain(dom)
for row in ext.identity_boundedness_probe(params, 1, [0.2, 0.1, 0.05, 0.025], cut, dom):
    alpha = ext.AlphaVector((0.0, row.alpha_i, 0.5))
    check = ext.identity_residual_boundary(params, alpha, cut, dom, 1)
    print(f"alpha_1={row.alpha_i:<6} A_1={row.A_i:10.3f} residual={row.residual:.8f} "
          f"transition={check:.8f}")

# %% [markdown]
# Degenerate case p = k = 2 in the plane with m = 2: both bounds sit near
# (1/2)((k-1)/k)^(k-1) = 1/4.

# %%
d2, p2 = PointInBall(2), HardyParams(2, 2, 2.0, m=2)
print([r.value for r in mz.convergence_table(d2, p2, dofs=500, refinements=1)])
sweep = ext.sharpness_sweep(p2, 2.0, ext.CutoffSpec.for_domain(d2),
                            ext.ordered_schedule(2, first=2), d2)
print([round(s.quotient, 6) for s in sweep])
