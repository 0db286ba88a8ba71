import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardy_series.exceptions import DepthError, DomainError, ParameterError
from hardy_series.special_functions import (MAX_DEPTH, XSeriesParams, bfun, clamp_t, dxk_dt,
                                            eta, eta_and_b_from_log, eta_identity_residual,
                                            eta_prime, weight_terms, x1, x_stack,
                                            x_stack_from_log, xk)

mp.mp.dps = 40
t_unit = st.floats(min_value=1e-300, max_value=1.0, allow_nan=False)


def mp_xk(i, t):
    x = mp.mpf(t)
    x = 1 / (1 - mp.log(x))
    for _ in range(i - 1):
        x = 1 / (1 - mp.log(x))
    return x


def test_xfun_reference_value():
    assert xk(2, 0.3678794) == pytest.approx(0.59061, abs=1e-5)


@pytest.mark.parametrize("i", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("t", [1e-300, 1e-50, 1e-6, 0.1, 0.5, 0.99, 1.0])
def test_xk_matches_mpmath(i, t):
    assert xk(i, t) == pytest.approx(float(mp_xk(i, t)), rel=1e-14)


@given(t_unit, st.integers(1, MAX_DEPTH))
def test_xk_in_unit_interval_and_normalised(t, i):
    x = xk(i, t)
    assert 0 < x <= 1
    assert xk(i, 1.0) == 1.0


@given(st.floats(1e-200, 0.999), st.integers(1, 6))
def test_xk_ordering_across_depth(t, i):
    # deeper logs approach zero more slowly
    assert xk(i, t) <= xk(i + 1, t)


@given(st.floats(1e-200, 0.5), st.floats(1.0001, 10.0), st.integers(1, 5))
def test_xk_increasing_in_t(t, factor, i):
    assert xk(i, t) <= xk(i, min(1.0, t * factor))


def test_x_stack_consistent_with_xk():
    t = np.geomspace(1e-30, 1, 17)
    st_ = x_stack(t, 5)
    for i in range(1, 6):
        np.testing.assert_allclose(st_[i - 1], xk(i, t), rtol=1e-15)


@given(st.floats(0.0, 600.0), st.integers(1, 3))
def test_stack_from_log_matches_direct(y, level):
    depth = level + 3
    xs = x_stack_from_log(y, depth, level)
    # recover s_1 and compare with the t-based stack when t is representable
    s = y
    with np.errstate(over="ignore"):
        for _ in range(level - 1):
            s = np.expm1(s)
    if np.isfinite(s) and s < 700:
        np.testing.assert_allclose(xs.ravel(), x_stack(np.exp(-s), depth).ravel(), rtol=1e-12)


@pytest.mark.parametrize("t", [0.0, -1.0, 1.5, np.nan])
def test_domain_errors(t):
    with pytest.raises(DomainError):
        x1(t)


def test_depth_errors():
    with pytest.raises(DepthError):
        xk(MAX_DEPTH + 1, 0.5)
    with pytest.raises(ParameterError):
        xk(0, 0.5)
    with pytest.raises(ParameterError):
        XSeriesParams(0)
    with pytest.raises(ParameterError):
        dxk_dt(2, -1.0, 0.5)


def test_clamp_flags_underflow():
    t, flag = clamp_t(np.array([0.0, 1e-310, 0.5]))
    assert flag.tolist() == [True, True, False]
    assert t[0] == 1e-300 and t[2] == 0.5


@pytest.mark.parametrize("i", [1, 2, 3, 4])
@pytest.mark.parametrize("beta", [-0.5, 1.0, 2.0])
def test_derivative_matches_mpmath(i, beta):
    for t in [1e-8, 1e-3, 0.2, 0.9]:
        ref = mp.diff(lambda s: mp_xk(i, s) ** beta, mp.mpf(t))
        assert dxk_dt(i, beta, t) == pytest.approx(float(ref), rel=1e-12)


@given(st.floats(1e-100, 0.999), st.integers(1, 8))
def test_eta_identity(t, m):
    p = XSeriesParams(m)
    scale = max(1.0, float(eta(p, t)) ** 2)
    assert eta_identity_residual(p, t) <= 1e-13 * scale


@given(st.floats(1e-300, 1.0), st.integers(1, 8))
def test_ratio_bound(t, m):
    p = XSeriesParams(m)
    e, b = eta(p, t), bfun(p, t)
    r = e * e / b
    assert 1 - 1e-12 <= r <= m * (1 + 1e-12)


def test_weight_terms_are_partial_products():
    p = XSeriesParams(3)
    t = np.array([1e-5, 0.3])
    w = weight_terms(p, t)
    xs = x_stack(t, 3)
    np.testing.assert_allclose(w[2], (xs[0] * xs[1] * xs[2]) ** 2)
    np.testing.assert_allclose(bfun(p, t), w.sum(axis=0))


def test_eta_from_log_matches_t_version():
    y = np.array([0.0, 1.0, 30.0])
    e, b = eta_and_b_from_log(y, 4)
    p = XSeriesParams(4)
    np.testing.assert_allclose(e, eta(p, np.exp(-y)), rtol=1e-14)
    np.testing.assert_allclose(b, bfun(p, np.exp(-y)), rtol=1e-14)


def test_eta_prime_matches_finite_difference():
    p = XSeriesParams(3)
    t, h = 0.01, 1e-7
    fd = (eta(p, t + h) - eta(p, t - h)) / (2 * h)
    assert eta_prime(p, t) == pytest.approx(fd, rel=1e-7)
