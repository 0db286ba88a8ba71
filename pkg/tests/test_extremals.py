import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from hardy_series import extremals as ext
from hardy_series.exceptions import IntegrabilityError, ParameterError
from hardy_series.functionals import HardyParams, rayleigh_quotient, rayleigh_quotient_degenerate
from hardy_series.geometry import BallBoundary, PointInBall
from hardy_series.special_functions import x_stack

DOM = PointInBall(3)
CUT = ext.CutoffSpec.for_domain(DOM)
P2 = HardyParams(3, 3, 2.0, 1)


def test_cutoff_is_c1():
    c = ext.CutoffSpec(0.5)
    assert c.phi(0.25) == 1.0 and c.phi(0.5) == 0.0 and c.phi(0.1) == 1.0
    r = np.linspace(0.26, 0.49, 7)
    h = 1e-6
    np.testing.assert_allclose(c.dphi(r), (c.phi(r + h) - c.phi(r - h)) / (2 * h), rtol=1e-6)
    assert c.dphi(0.25) == 0.0 and c.dphi(0.5) == 0.0


@given(st.floats(1e-50, 1.0), st.lists(st.floats(0, 1), min_size=2, max_size=4))
def test_zeta_definition(t, a):
    alpha = ext.AlphaVector(tuple(a))
    xs = x_stack(t, alpha.m)
    expect = -a[0] + sum((1 - a[i]) * np.prod(xs[:i]) for i in range(1, alpha.m + 1))
    assert ext.zeta(t, alpha) == pytest.approx(expect, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("params,alpha", [
    (P2, (0.1, 0.3)),
    (HardyParams(3, 3, 2.5, 2), (0.2, 0.3, 0.5)),
    (HardyParams(3, 3, 1.5, 1), (0.3, 0.2)),
])
def test_exact_quotient_matches_mesh_quotient(params, alpha):
    al = ext.AlphaVector(alpha)
    exact = ext.family_quotient(params, al, CUT, DOM)
    mesh = rayleigh_quotient(ext.test_profile(params, al, CUT, n=1500), DOM, params)
    assert exact.quotient == pytest.approx(mesh, rel=1e-7)


@pytest.mark.parametrize("k", [2, 3])
def test_degenerate_exact_matches_mesh(k):
    dom = PointInBall(k)
    al = ext.AlphaVector((0, 0.3, 0.5))
    exact = ext.family_quotient_degenerate(k, al, CUT, dom)
    prof = ext.test_profile_degenerate(k, al, CUT, y_max=1e250, n=3000)
    assert exact.quotient == pytest.approx(rayleigh_quotient_degenerate(prof, dom, k, 2), rel=1e-8)


def test_denominator_direct_quadrature():
    # alpha_0 = 0.2: u = phi r^(-H + 0.1) X_1^(-1/2 + 0.15)
    al = ext.AlphaVector((0.2, 0.3))
    sp = ext.family_quotient(P2, al, CUT, DOM)

    def f(r):
        x = x_stack(r, 1)[0]
        u = CUT.phi(r) * r ** (-0.5 + 0.1) * x ** ((-1 + 0.3) / 2)
        return u * u / r**2 * x**2 * 4 * math.pi * r**2

    ref = quad(f, 0, 0.25, limit=500, epsrel=1e-12)[0] + quad(f, 0.25, 0.5, epsrel=1e-12)[0]
    assert sp.denominator == pytest.approx(ref, rel=1e-8)


def test_sweep_approaches_constant_from_above():
    rows = ext.sharpness_sweep(P2, 2.0, CUT, ext.ordered_schedule(1), DOM)
    q = [r.quotient for r in rows]
    assert all(a > b for a, b in zip(q, q[1:]))
    assert all(v >= 0.25 for v in q)
    assert q[-1] < 0.26


def test_divergent_denominator_raises():
    with pytest.raises(IntegrabilityError):
        ext.family_quotient(P2, ext.AlphaVector((0.0, 0.0)), CUT, DOM)
    with pytest.raises(IntegrabilityError):
        ext.test_profile(P2, ext.AlphaVector((0.0, 0.0)), CUT)


def test_schedules():
    s = ext.ordered_schedule(3, finals=(1e-2,), ratio=10)
    assert s[0].alphas == (0.0, 1e-4, 1e-3, 1e-2)
    s = ext.ordered_schedule(3, finals=(1e-2,), ratio=10, first=2)
    assert s[0].alphas == (0.0, 0.0, 1e-3, 1e-2)
    g = ext.gamma_offset_schedule(1, 1.5, (0.04,))
    assert g[0].alphas == (0.0, 0.54)
    with pytest.raises(ParameterError):
        ext.AlphaVector((0.1,))
    with pytest.raises(ParameterError):
        ext.AlphaVector((0.1, -0.2))


def test_auxiliary_integral_direct():
    params = HardyParams(3, 3, 2.0, 2)
    al = ext.AlphaVector((0.0, 0.2, 0.5))
    # A_1 has exponents X_1^(1 + 0.2) X_2^(1 - 1.5) against dr / r
    assert ext._aux_betas(al, 1, 1) == (0.0, (0.2, -1.5))

    def f(w):
        # s = -log r = expm1(w), so ds = e^w dw and X_1^1.2 ds = e^(-0.2 w) dw
        r = math.exp(-math.expm1(min(w, 6.0)))  # phi = 1 well before w = 6
        return CUT.phi(r) ** 2 * 4 * math.pi * math.exp(-0.2 * w) * (1 + w) ** 0.5

    w1, w2 = math.log1p(math.log(2)), math.log1p(math.log(4))
    ref = (quad(f, w1, w2, epsrel=1e-13)[0]
           + quad(f, w2, math.inf, epsrel=1e-13, limit=500)[0])
    assert ext.auxiliary_integral(params, al, CUT, DOM, 1) == pytest.approx(ref, rel=1e-8)
    assert ext.auxiliary_integral(params, al.replace(1, 0.0), CUT, DOM, 1) == math.inf


@pytest.mark.parametrize("i,alpha", [(1, (0.0, 0.2, 0.5)), (0, (0.3, 0.2, 0.5))])
def test_identity_residual_equals_transition_integral(i, alpha):
    params = HardyParams(3, 3, 2.0, 2)
    al = ext.AlphaVector(alpha)
    _, res = ext.identity_residual(params, al, CUT, DOM, i)
    assert res == pytest.approx(ext.identity_residual_boundary(params, al, CUT, DOM, i),
                                rel=1e-8)


def test_probe_rows_and_boundary_geometry():
    params = HardyParams(3, 3, 2.0, 2)
    rows = ext.identity_boundedness_probe(params, 1, [0.2, 0.1], CUT, DOM)
    assert rows[1].A_i > rows[0].A_i
    with pytest.raises(ParameterError):
        ext.identity_residual_boundary(HardyParams(3, 1, 2.0, 2), ext.AlphaVector((0, .2, .5)),
                                       CUT, BallBoundary(3), 1)
    with pytest.raises(ParameterError):
        ext.identity_residual(params, ext.AlphaVector((0.1, 0.2, 0.5)), CUT, DOM, 1)
