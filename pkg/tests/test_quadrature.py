import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardy_series.exceptions import FinitenessError, ParameterError
from hardy_series.quadrature import (BetaExponents, Finiteness, adaptive_gk,
                                     classify_finiteness, closed_form, divergence_probe,
                                     singular_radial_integral)

mp.mp.dps = 30


def test_gk_polynomial_and_smooth():
    assert adaptive_gk(lambda x: x**5, 0, 2).value == pytest.approx(64 / 6, rel=1e-14)
    assert adaptive_gk(np.sin, 0, math.pi).value == pytest.approx(2.0, rel=1e-13)


def test_gk_endpoint_singularity():
    r = adaptive_gk(lambda x: x ** -0.5, 0, 1, rel_tol=1e-10)
    assert r.value == pytest.approx(2.0, rel=1e-8)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5),
       st.floats(-3, 3))
def test_classification_rule(betas, b0):
    be = BetaExponents(b0, tuple(betas))
    allb = [b0] + list(betas)
    nz = [b for b in allb if b != 0]
    expected = Finiteness.FINITE if nz and nz[0] > 0 else Finiteness.INFINITE
    assert classify_finiteness(be) is expected


def test_all_zero_is_infinite():
    assert classify_finiteness(BetaExponents(0, (0, 0))) is Finiteness.INFINITE
    with pytest.raises(FinitenessError):
        singular_radial_integral(BetaExponents(0, (0, 0)))


@pytest.mark.parametrize("i,beta,delta,D", [
    (1, 0.5, 1, 1), (1, 2.0, 0.5, 1), (2, 0.3, 1, 1), (2, 1.0, 1, 4),
    (3, 0.7, 1, 1), (3, 0.05, 0.1, 1),
])
def test_closed_form_oracle(i, beta, delta, D):
    be = BetaExponents(0, (0,) * (i - 1) + (beta,), delta, D)
    assert singular_radial_integral(be, rel_tol=1e-11) == pytest.approx(
        closed_form(i, beta, delta, D), rel=1e-10)


def test_power_weight_matches_mpmath():
    # r^(-1+b0) X_1^(1+b1) on (0, 1)
    be = BetaExponents(0.5, (-1.5,))
    ref = mp.quad(lambda r: r ** (-0.5) * (1 - mp.log(r)) ** 0.5, [0, 1e-8, 1])
    assert singular_radial_integral(be) == pytest.approx(float(ref), rel=1e-9)


def test_smooth_factor_multiplies():
    be = BetaExponents(0, (1.0,))
    val = singular_radial_integral(be, smooth=lambda pts: np.full_like(pts.r, 3.0))
    assert val == pytest.approx(3 * closed_form(1, 1.0), rel=1e-10)


def test_probe_grows_on_divergent_and_saturates_on_convergent():
    eps = np.geomspace(1e-2, 1e-200, 6)
    div = divergence_probe(BetaExponents(0, (0, 0)), eps)
    # exact truncated value log(1 + log(1 + log(1/eps))) is unbounded
    exact = np.log1p(np.log1p(-np.log(eps)))
    np.testing.assert_allclose(div, exact, rtol=1e-8)
    assert np.all(np.diff(div) > 0)
    conv = divergence_probe(BetaExponents(0, (1.0,)), eps)
    np.testing.assert_allclose(conv, 1.0 - 1.0 / (1.0 - np.log(eps)), rtol=1e-9)


def test_tolerance_and_D_validation():
    with pytest.raises(ParameterError):
        singular_radial_integral(BetaExponents(0, (1.0,)), rel_tol=1e-15)
    with pytest.raises(ParameterError):
        BetaExponents(0, (1.0,), delta=2.0, D=1.0)
    with pytest.raises(ParameterError):
        divergence_probe(BetaExponents(0, (1.0,)), [1e-3, 1e-2])
