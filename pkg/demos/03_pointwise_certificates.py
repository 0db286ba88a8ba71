# %% [markdown]
# The improved inequality rests on a pointwise inequality in t = d/D between
# two explicit functions. A certificate evaluates the margin on a log grid,
# refines around the minimum and reports a verdict.

# %%
from hardy_series import certifier as cert
from hardy_series.functionals import HardyParams

params = HardyParams(3, 3, 2.0, m=3)
rep = cert.certify_main(params, cert.CaseSelector.for_params(params))
print(rep.verdict.value, rep.min_margin, rep.case)

# %% [markdown]
# For 1 < p < 2 the free parameter a must be positive, and the scale D may
# need to exceed sup d. auto_certify searches both.

# %%
auto = cert.auto_certify(HardyParams(3, 3, 1.5, m=2))
print("case", auto.selector.case, "a =", auto.selector.a_value, "D0 =", auto.D0)
print("a = 0 instead:", cert.certify_main(HardyParams(3, 3, 1.5, 2, auto.D0),
                                          cert.CaseSelector("a", 0.0)).verdict.value)

# %% [markdown]
# The degenerate chain p = k. For k = 2 the margin is identically zero.

# %%
for k, m in [(2, 3), (3, 2), (4, 3)]:
    r = cert.certify_degenerate(k, m)
    print(k, m, r.verdict.value, r.min_margin)
