import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from hardy_series.exceptions import DegenerateDenominator, ParameterError
from hardy_series.functionals import (HardyParams, RadialProfile, elementary_inequality_margin,
                                      energy_density, energy_density_grad, gradient_energy,
                                      hardy_functional, hardy_functional_degenerate,
                                      series_vector_field, rayleigh_quotient,
                                      rayleigh_quotient_degenerate, theorem_constant,
                                      vector_field_lower_bound_check)
from hardy_series.geometry import BallBoundary, PointInBall, measure_density
from hardy_series.special_functions import x_stack

R1, R2 = 1e-3, 0.6


def bump(r):
    """sin^2 bump in log r supported on (R1, R2) and its r-derivative."""
    L = math.log(R2 / R1)
    th = math.pi * (math.log(r / R1)) / L
    return math.sin(th) ** 2, math.sin(2 * th) * math.pi / (L * r)


def bump_profile(shift, n=200):
    y1, y2 = -math.log(R2), -math.log(R1)
    tau = np.linspace(math.log1p(y1), math.log1p(y2), n)
    tau = np.union1d(tau, [math.log1p(0.5 * (y1 + y2))])
    L = math.log(R2 / R1)

    def v(t):
        y = np.expm1(t)
        th = math.pi * (-y - math.log(R1)) / L
        return np.exp(-shift * y) * np.sin(th) ** 2

    def dv(t):
        y = np.expm1(t)
        th = math.pi * (-y - math.log(R1)) / L
        du_dy = -np.sin(2 * th) * math.pi / L
        return np.exp(t) * np.exp(-shift * y) * (du_dy - shift * np.sin(th) ** 2)

    return RadialProfile.from_function(tau, v, dv, shift=shift)


def physical_functional(dom, params, terms):
    p, H = params.p, params.H
    c = params.series_constant

    def integrand(r):
        u, du = bump(r)
        xs = x_stack(r / params.D, max(terms, 1))
        w = sum(np.prod(xs[:j] ** 2) for j in range(1, terms + 1))
        mu = float(measure_density(dom, r))
        return (abs(du) ** p - (abs(H) ** p + c * w) * abs(u) ** p / r**p) * mu

    # |u'|^p has a kink where u' vanishes, at the log-midpoint
    val, _ = quad(integrand, R1, R2, points=[math.sqrt(R1 * R2)], limit=400, epsabs=0,
                  epsrel=1e-12)
    return val


@pytest.mark.parametrize("p", [2.0, 1.5, 2.5])
@pytest.mark.parametrize("m", [1, 2])
def test_functional_matches_physical_quadrature(p, m):
    dom = PointInBall(3)
    params = HardyParams(3, 3, p, m, 1.0)
    prof = bump_profile(0.0)
    ref = physical_functional(dom, params, m)
    assert hardy_functional(prof, dom, params) == pytest.approx(ref, rel=1e-9)


def test_gradient_energy_matches_physical():
    dom = BallBoundary(3)
    prof = bump_profile(0.3)
    ref, _ = quad(lambda r: bump(r)[1] ** 2 * float(measure_density(dom, r)), R1, R2,
                  limit=400, epsrel=1e-12)
    assert gradient_energy(prof, dom, 2.0) == pytest.approx(ref, rel=1e-9)


def test_shift_does_not_change_the_function():
    dom, params = PointInBall(3), HardyParams(3, 3, 2.0, 1)
    a = rayleigh_quotient(bump_profile(0.0), dom, params)
    b = rayleigh_quotient(bump_profile(0.5), dom, params)
    assert a == pytest.approx(b, rel=1e-12)


def random_profile(vals):
    vals = np.concatenate([[0.0], np.abs(vals), [0.0]])
    tau = np.linspace(0.0, 4.0, vals.size)
    return RadialProfile(tau, vals, shift=0.5)


profiles = st.lists(st.floats(0.01, 10.0), min_size=4, max_size=14)


@given(profiles)
def test_quotient_above_series_constant(vals):
    dom, params = PointInBall(3), HardyParams(3, 3, 2.0, 1)
    assert rayleigh_quotient(random_profile(vals), dom, params) >= theorem_constant(params) - 1e-9


@given(profiles, st.floats(1e-3, 1e3))
def test_quotient_is_scale_invariant(vals, c):
    dom, params = PointInBall(3), HardyParams(3, 3, 2.0, 2)
    prof = random_profile(vals)
    assert rayleigh_quotient(prof.scaled(c), dom, params) == pytest.approx(
        rayleigh_quotient(prof, dom, params), rel=1e-10)


@given(profiles)
def test_improved_functional_nonnegative(vals):
    dom, params = PointInBall(3), HardyParams(3, 3, 2.0, 3)
    prof = random_profile(vals)
    assert hardy_functional(prof, dom, params) >= -1e-10 * gradient_energy(prof, dom, 2.0)


@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([1.3, 1.5, 2.5, 3.0, 4.0]),
       st.floats(-2, 2).filter(lambda h: abs(h) > 0.05))
def test_energy_density_direct_formula_and_convexity(v, vy, p, h):
    F = float(energy_density(np.array([v]), np.array([vy]), h, p)[0])
    direct = abs(vy + h * v) ** p - abs(h * v) ** p - p * h * abs(h) ** (p - 2) * (
        np.sign(v) * abs(v) ** (p - 1)) * vy
    scale = abs(vy) ** p + abs(h * v) ** p + 1e-300
    assert F >= -1e-12 * scale
    assert F == pytest.approx(direct, abs=1e-10 * scale)


def test_energy_density_small_ratio_accuracy():
    # v' << h v: the naive formula cancels, the remainder form does not
    v, vy, h, p = np.array([1.0]), np.array([1e-9]), 0.5, 3.0
    F = energy_density(v, vy, h, p)[0]
    exact = p * (p - 1) / 2 * abs(h) ** (p - 2) * 1e-18
    assert F == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_energy_density_gradient(p):
    rng = np.random.default_rng(1)
    v, vy = rng.normal(size=20), rng.normal(size=20)
    dv, dvy = energy_density_grad(v, vy, 0.7, p)
    e = 1e-6
    fdv = (energy_density(v + e, vy, 0.7, p) - energy_density(v - e, vy, 0.7, p)) / (2 * e)
    fdy = (energy_density(v, vy + e, 0.7, p) - energy_density(v, vy - e, 0.7, p)) / (2 * e)
    np.testing.assert_allclose(dv, fdv, rtol=1e-5, atol=1e-7)
    np.testing.assert_allclose(dvy, fdy, rtol=1e-5, atol=1e-7)


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(1.01, 6.0))
def test_elementary_inequality(a, b, p):
    assert elementary_inequality_margin(np.array([a]), np.array([b]), p)[0] >= -1e-9 * (
        1 + np.linalg.norm(a) ** p + np.linalg.norm(b) ** p)


@pytest.mark.parametrize("p,a", [(2.0, 0.0), (2.5, 0.0), (1.5, 0.1)])
def test_vector_field_bound_nonnegative(p, a):
    dom, params = PointInBall(3), HardyParams(3, 3, p, 1)
    prof = bump_profile(0.0)
    field = series_vector_field(params, a)
    assert vector_field_lower_bound_check(prof, dom, params, field) >= 0


def test_degenerate_quotient_and_functional():
    dom = PointInBall(2)
    n = 200
    tau = np.linspace(0.0, 3.0, n)
    vals = np.sin(np.pi * tau / 3.0)
    prof = RadialProfile(tau, vals, level=2, shift=0.5)
    q = rayleigh_quotient_degenerate(prof, dom, 2, 2)
    assert q >= 0.25
    assert hardy_functional_degenerate(prof, dom, 2, 2) >= 0


def test_zero_profile_and_parameter_errors():
    tau = np.linspace(0, 2, 10)
    zero = RadialProfile(tau, np.zeros(10), shift=0.5)
    dom, params = PointInBall(3), HardyParams(3, 3, 2.0, 1)
    with pytest.raises(DegenerateDenominator):
        rayleigh_quotient(zero, dom, params)
    with pytest.raises(ParameterError):
        HardyParams(3, 1, 1.0)
    with pytest.raises(ParameterError):
        HardyParams(2, 3, 2.0)
    with pytest.raises(ParameterError):
        rayleigh_quotient(zero, PointInBall(2), params)


def test_from_ru_round_trip():
    r = np.geomspace(1e-6, 1.0, 50)
    u = r ** -0.5 * np.log(1 / r)
    prof = RadialProfile.from_ru(r, u, shift=0.5)
    np.testing.assert_allclose(np.sort(prof.r), r, rtol=1e-13)
    np.testing.assert_allclose(prof.u[::-1], u, rtol=1e-12)


def test_theorem_constants():
    assert theorem_constant(HardyParams(3, 3, 2.0)) == 0.25
    assert theorem_constant(HardyParams(2, 2, 2.0)) == 0.25
    assert theorem_constant(HardyParams(3, 3, 3.0)) == pytest.approx(1 / 3 * (2 / 3))
