"""Improved Hardy functionals and Rayleigh quotients of radial profiles.

Profiles are stored in *reduced* form.  With the log coordinate of level
``l`` (``y = s_1 = -log(r/D)`` for the main family, ``y = s_2 = log(1+s_1)``
for the degenerate family ``p = k``) a profile is written

    u = exp(h y) v(y),

where ``h = (k-p)/p`` in the main family and ``h = (k-1)/k`` in the
degenerate one.  This is an exact change of variables under which

    int |grad u|^p            = C int |v' + h v|^p rho dy
    |h|^p int |u|^p/d^p [X_1^k] = C |h|^p int |v|^p rho dy
    int |u|^p/d^p [X_1^k] W    = C int |v|^p W rho dy

with ``C = c D^(k-p)``.  The difference of the first two is evaluated with
its first-order part integrated by parts and the remaining binomial tail
summed directly, so deep profiles (``y`` up to 1e300) lose no precision.

The mesh variable is ``tau = log(1 + y)`` and ``v`` is piecewise cubic in
``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import _binomial
from .exceptions import DegenerateDenominator, DomainError, ParameterError
from .quadrature import log_points

GAUSS_POINTS = 8
_GX, _GW = np.polynomial.legendre.leggauss(GAUSS_POINTS)


@dataclass(frozen=True)
class HardyParams:
    """Dimensions, exponent, series depth and scale of one inequality."""

    N: int
    k: int
    p: float
    m: int = 1
    D: float = 1.0

    def __post_init__(self):
        if not 1 <= self.k <= self.N:
            raise ParameterError(f"codimension k={self.k} must satisfy 1 <= k <= N={self.N}")
        if not self.p > 1:
            raise ParameterError("p must exceed 1")
        if int(self.m) != self.m or self.m < 0:
            raise ParameterError("m must be a nonnegative integer")
        if not self.D > 0:
            raise ParameterError("D must be positive")
        if self.degenerate and self.k < 2:
            raise ParameterError("degenerate family p = k needs k >= 2")

    @property
    def degenerate(self):
        return self.p == self.k

    @property
    def H(self):
        return (self.k - self.p) / self.p

    @property
    def level(self):
        """Log level at which the reduced profile lives."""
        return 2 if self.degenerate else 1

    @property
    def shift(self):
        """Exponent ``h`` of the reduction ``u = exp(h y) v``."""
        return (self.k - 1) / self.k if self.degenerate else self.H

    @property
    def series_constant(self):
        """``(p-1)/(2p) |H|^(p-2)``, or ``(1/2)((k-1)/k)^(k-1)`` when ``p = k``."""
        h = self.shift
        return (self.p - 1) / (2 * self.p) * abs(h) ** (self.p - 2)

    @property
    def hardy_constant(self):
        """``|H|^p``, or ``((k-1)/k)^k`` when ``p = k``."""
        return abs(self.shift) ** self.p

    def check_domain(self, dom):
        if dom.k != self.k or dom.N != self.N:
            raise ParameterError("domain and parameters disagree on (N, k)")
        if self.D < dom.delta * (1 - 1e-15):
            raise ParameterError(f"D={self.D} must be at least delta={dom.delta}")
        if self.degenerate and dom.kind == "boundary":
            raise ParameterError("degenerate family needs codimension >= 2")


def theorem_constant(params):
    """Best constant of the next series term (1/4 whenever p = 2)."""
    return params.series_constant


def outer_coordinate(dom, D, level):
    """Log coordinate of the outer radius ``r = delta``."""
    y = -math.log(dom.delta / D)
    for _ in range(level - 1):
        y = math.log1p(y)
    return max(y, 0.0)


@dataclass
class RadialProfile:
    """A radial function in reduced form ``u = exp(shift * y) v``.

    ``tau`` are mesh nodes (``tau = log1p(y)``), ``values`` the samples of
    ``v`` there.  Without explicit callables the interpolant is a cubic
    spline in ``tau``; ``func``/``dfunc`` (``v`` and ``dv/dtau``) give an
    analytic profile that is merely sampled on the mesh.
    """

    tau: np.ndarray
    values: np.ndarray
    level: int = 1
    shift: float = 0.0
    D: float = 1.0
    boundary_zero: tuple = (True, True)
    func: Optional[Callable] = None
    dfunc: Optional[Callable] = None
    breaks: Optional[np.ndarray] = None
    _spline: object = field(default=None, repr=False)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.tau.ndim != 1 or self.tau.size < 2 or np.any(np.diff(self.tau) <= 0):
            raise DomainError("mesh must be strictly increasing with at least two nodes")
        if self.tau[0] < 0:
            raise DomainError("mesh must lie in tau >= 0 (r <= D)")
        if self.values.shape != self.tau.shape:
            raise DomainError("values must match the mesh")
        if self.func is None and self._spline is None:
            self._spline = CubicSpline(self.tau, self.values)

    # -- evaluation ---------------------------------------------------------
    def v(self, tau):
        if self.func is not None:
            return self.func(tau)
        return self._spline(tau)

    def dv_dtau(self, tau):
        if self.dfunc is not None:
            return self.dfunc(tau)
        return self._spline(tau, 1)

    @property
    def cells(self):
        return self.tau if self.breaks is None else self.breaks

    @property
    def y(self):
        return np.expm1(self.tau)

    @property
    def r(self):
        """Radii of the mesh nodes (underflow to 0 is possible deep down)."""
        s1 = self.y
        for _ in range(self.level - 1):
            s1 = np.expm1(s1)
        with np.errstate(under="ignore", over="ignore"):
            return self.D * np.exp(-s1)

    @property
    def u(self):
        """Physical values ``u`` at the nodes (may overflow deep down)."""
        with np.errstate(over="ignore"):
            return np.exp(self.shift * self.y) * self.values

    def with_shift(self, h):
        """Same function re-expressed with reduction exponent ``h``."""
        if h == self.shift:
            return self
        factor = lambda t: np.exp((self.shift - h) * np.expm1(t))
        if self.func is None:
            return RadialProfile(self.tau, self.values * factor(self.tau), self.level, h, self.D,
                                 self.boundary_zero, breaks=self.breaks)
        f, df, s = self.func, self.dfunc, self.shift - h
        return RadialProfile(
            self.tau, self.values * factor(self.tau), self.level, h, self.D, self.boundary_zero,
            func=lambda t: factor(t) * f(t),
            dfunc=lambda t: factor(t) * (df(t) + s * np.exp(t) * f(t)),
            breaks=self.breaks)

    def scaled(self, c):
        if self.func is None:
            return RadialProfile(self.tau, c * self.values, self.level, self.shift, self.D,
                                 self.boundary_zero, breaks=self.breaks)
        f, df = self.func, self.dfunc
        return RadialProfile(self.tau, c * self.values, self.level, self.shift, self.D,
                             self.boundary_zero, func=lambda t: c * f(t),
                             dfunc=lambda t: c * df(t), breaks=self.breaks)

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_ru(cls, r, u, D=1.0, shift=0.0, level=1, boundary_zero=(True, True)):
        """Build from physical samples ``(r_j, u(r_j))`` (e.g. a CSV file)."""
        r = np.asarray(r, dtype=float)
        u = np.asarray(u, dtype=float)
        if np.any(r <= 0) or np.any(r > D):
            raise DomainError("radii must lie in (0, D]")
        order = np.argsort(-r)
        y = -np.log(r[order] / D)
        for _ in range(level - 1):
            y = np.log1p(y)
        tau = np.log1p(y)
        return cls(tau, u[order] * np.exp(-shift * y), level, shift, D, boundary_zero)

    @classmethod
    def from_function(cls, tau, func, dfunc, level=1, shift=0.0, D=1.0,
                      boundary_zero=(True, True), breaks=None):
        tau = np.asarray(tau, dtype=float)
        return cls(tau, func(tau), level, shift, D, boundary_zero, func=func, dfunc=dfunc,
                   breaks=breaks)


def log_graded_mesh(tau0, depth, n):
    """``n`` nodes uniform in ``tau = log(1 - log(r/D))`` starting at the outer radius."""
    return tau0 + depth * np.linspace(0.0, 1.0, n)


# -- quadrature over a profile -------------------------------------------------

@dataclass
class _QuadData:
    tau: np.ndarray
    w: np.ndarray      # weights for dy (Gauss weight * dy/dtau)
    y: np.ndarray
    v: np.ndarray
    vy: np.ndarray
    r: np.ndarray
    xs: np.ndarray
    rho: np.ndarray
    rho_y: np.ndarray


def gauss_nodes(edges):
    """Gauss-Legendre nodes and ``dtau`` weights on each cell of ``edges``."""
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    tau = (mid[:, None] + half[:, None] * _GX[None, :]).ravel()
    w = (half[:, None] * _GW[None, :]).ravel()
    return tau, w


def reduced_points(tau, level, depth, D, dom):
    """Geometry at quadrature points given by ``tau``: ``(y, r, xs, rho, rho_y)``."""
    y = np.expm1(tau)
    pts = log_points(y, level, max(depth, level, 1), D)
    rho = dom.rho(pts.r)
    # d rho / dy at this level: d/ds_1 scaled by ds_1/dy = 1/(X_1 ... X_{l-1})
    rho_y = dom.rho_log_derivative(pts.r)
    if level > 1:
        with np.errstate(over="ignore", invalid="ignore"):
            rho_y = np.where(rho_y == 0, 0.0, rho_y / np.prod(pts.xs[: level - 1], axis=0))
    return y, pts, rho, rho_y


def _quad(profile, dom, depth):
    tau, wt = gauss_nodes(profile.cells)
    y, pts, rho, rho_y = reduced_points(tau, profile.level, depth, profile.D, dom)
    jac = np.exp(tau)  # dy/dtau
    v = profile.v(tau)
    vy = profile.dv_dtau(tau) / jac
    return _QuadData(tau, wt * jac, y, v, vy, pts.r, pts.xs, rho, rho_y)


def reduced_weights(xs, level, count):
    """Reduced series weights ``R_j = X_l^2 ... X_{l+j-1}^2`` for ``j = 1..count``."""
    if count == 0:
        return np.zeros((0,) + xs.shape[1:])
    return np.cumprod(xs[level - 1: level - 1 + count] ** 2, axis=0)


# -- pointwise energy density ---------------------------------------------------

def energy_density(v, vy, h, p):
    """``|v'+hv|^p - |hv|^p - p h|h|^(p-2)|v|^(p-2) v v'``, nonnegative by convexity."""
    v = np.asarray(v, dtype=float)
    vy = np.asarray(vy, dtype=float)
    if p == 2:
        return vy * vy
    out = np.empty(np.broadcast(v, vy).shape)
    v, vy = np.broadcast_arrays(v, vy)
    hv = h * v
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = vy / hv
    small = np.isfinite(eps) & (np.abs(eps) < _binomial.SERIES_RADIUS)
    out[small] = np.abs(hv[small]) ** p * _binomial.remainder(eps[small], p, 2)
    big = ~small
    vb, vyb = v[big], vy[big]
    out[big] = (np.abs(vyb + h * vb) ** p - np.abs(h * vb) ** p
                - p * h * abs(h) ** (p - 2) * np.sign(vb) * np.abs(vb) ** (p - 1) * vyb)
    return out


def energy_density_grad(v, vy, h, p):
    """Partial derivatives ``(dF/dv, dF/dv')`` of :func:`energy_density`."""
    v = np.asarray(v, dtype=float)
    vy = np.asarray(vy, dtype=float)
    if p == 2:
        return np.zeros_like(v), 2.0 * vy
    hv = h * v
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = vy / hv
    small = np.isfinite(eps) & (np.abs(eps) < _binomial.SERIES_RADIUS)
    dv = np.empty_like(v)
    dvy = np.empty_like(v)
    base = np.sign(hv[small]) * np.abs(hv[small]) ** (p - 1)
    dvy[small] = p * base * _binomial.signed_power_remainder(eps[small], p - 1)
    dv[small] = p * h * base * _binomial.remainder(eps[small], p - 1, 2)
    big = ~small
    vb, vyb = v[big], vy[big]
    spow = lambda x: np.sign(x) * np.abs(x) ** (p - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(vb == 0, 0.0, np.abs(vb) ** (p - 2) * vyb)
    dvy[big] = p * spow(vyb + h * vb) - p * h * abs(h) ** (p - 2) * spow(vb)
    dv[big] = (p * h * spow(vyb + h * vb) - p * abs(h) ** p * spow(vb)
               - p * (p - 1) * h * abs(h) ** (p - 2) * tail)
    return dv, dvy


# -- functionals ------------------------------------------------------------------

def _prep(profile, dom, level, h):
    if profile.level != level:
        raise ParameterError(f"profile lives at log level {profile.level}, expected {level}")
    return profile.with_shift(h)


def _scale(dom, k, p, D):
    return dom.constant * D ** (k - p)


def reduced_terms(q, h, p, level, count):
    """Integrals (without the constant ``C``) of the pieces of the functional.

    Returns ``(E, W)`` where ``E`` is the reduced energy (gradient minus the
    Hardy term) and ``W[j-1] = int |v|^p R_j rho dy``.
    """
    F = energy_density(q.v, q.vy, h, p)
    E = np.dot(q.w, F * q.rho) - h * abs(h) ** (p - 2) * np.dot(q.w, np.abs(q.v) ** p * q.rho_y)
    R = reduced_weights(q.xs, level, count)
    W = (R * (np.abs(q.v) ** p * q.rho)[None, :]) @ q.w if count else np.zeros(0)
    return E, W


def gradient_energy(profile, dom, p):
    """``int |grad u|^p dx`` for the radial function ``u``."""
    level = profile.level
    h = (dom.k - p) / p if level == 1 else (dom.k - 1) / dom.k
    prof = _prep(profile, dom, level, h)
    q = _quad(prof, dom, level)
    return _scale(dom, dom.k, p, prof.D) * np.dot(q.w, np.abs(q.vy + h * q.v) ** p * q.rho)


def hardy_functional(profile, dom, params):
    """``I_m[u]``: gradient energy minus the Hardy term and ``m`` series terms."""
    if params.degenerate:
        raise ParameterError("p == k: use hardy_functional_degenerate")
    params.check_domain(dom)
    prof = _prep(profile, dom, 1, params.H)
    q = _quad(prof, dom, max(params.m, 1))
    E, W = reduced_terms(q, params.H, params.p, 1, params.m)
    return _scale(dom, params.k, params.p, params.D) * (E - params.series_constant * W.sum())


def hardy_functional_degenerate(profile, dom, k, m, D=1.0):
    """``I~_m[u]`` of the degenerate family ``p = k`` (``m >= 1``)."""
    params = HardyParams(dom.N, k, float(k), m, D)
    params.check_domain(dom)
    prof = _prep(profile, dom, 2, params.shift)
    q = _quad(prof, dom, max(m, 2))
    E, W = reduced_terms(q, params.shift, params.p, 2, m - 1)
    return _scale(dom, k, k, D) * (E - params.series_constant * W.sum())


def _denominator(q, p, level, count, gamma):
    """``int |v|^p R_{count} X_{l+count}^gamma rho dy``."""
    R = reduced_weights(q.xs, level, count)
    lead = R[-1] if count else np.ones_like(q.v)
    return np.dot(q.w, np.abs(q.v) ** p * lead * q.xs[level - 1 + count] ** gamma * q.rho)


@dataclass
class QuotientResult:
    numerator: float
    denominator: float
    quotient: float


def _quotient(num, den, scale_ref):
    if not abs(den) > 1e-14 * max(abs(scale_ref), abs(num), 1e-300):
        raise DegenerateDenominator(f"denominator {den:.3e} is numerically zero")
    return QuotientResult(num, den, num / den)


def rayleigh_quotient(profile, dom, params, gamma=2.0, full=False):
    """``I_{m-1}[u] / int |u|^p/d^p X_1^2 ... X_{m-1}^2 X_m^gamma``."""
    if params.degenerate:
        raise ParameterError("p == k: use rayleigh_quotient_degenerate")
    if params.m < 1:
        raise ParameterError("quotient needs m >= 1")
    params.check_domain(dom)
    prof = _prep(profile, dom, 1, params.H)
    q = _quad(prof, dom, params.m)
    E, W = reduced_terms(q, params.H, params.p, 1, params.m - 1)
    C = _scale(dom, params.k, params.p, params.D)
    num = C * (E - params.series_constant * W.sum())
    den = C * _denominator(q, params.p, 1, params.m - 1, gamma)
    res = _quotient(num, den, C * E)
    return res if full else res.quotient


def rayleigh_quotient_degenerate(profile, dom, k, m, gamma=2.0, D=1.0, full=False):
    """``I~_{m-1}[u] / int |u|^k/d^k X_1^k X_2^2 ... X_{m-1}^2 X_m^gamma`` (``m >= 2``)."""
    if m < 2:
        raise ParameterError("degenerate quotient needs m >= 2")
    params = HardyParams(dom.N, k, float(k), m, D)
    params.check_domain(dom)
    prof = _prep(profile, dom, 2, params.shift)
    q = _quad(prof, dom, m)
    E, W = reduced_terms(q, params.shift, params.p, 2, m - 2)
    C = _scale(dom, k, k, D)
    num = C * (E - params.series_constant * W.sum())
    den = C * _denominator(q, params.p, 2, m - 2, gamma)
    res = _quotient(num, den, C * E)
    return res if full else res.quotient


# -- vector-field bound --------------------------------------------------------------

@dataclass
class RadialField:
    """Radial vector field ``T = coeff(d) grad d`` with its exact derivative."""

    coeff: Callable
    derivative: Callable

    @classmethod
    def zero(cls):
        return cls(lambda r: np.zeros_like(r), lambda r: np.zeros_like(r))


def series_vector_field(params, a=0.0):
    """``T = H|H|^(p-2) d^(1-p) (1 + (p-1)/(pH) eta + a eta^2) grad d``."""
    from .special_functions import XSeriesParams, eta, bfun

    H, p = params.H, params.p
    c = (p - 1) / (p * H)
    xp = XSeriesParams(max(params.m, 1), params.D)
    amp = H * abs(H) ** (p - 2)

    def coeff(r):
        e = eta(xp, r / params.D)
        return amp * r ** (1 - p) * (1 + c * e + a * e * e)

    def derivative(r):
        t = r / params.D
        e, B = eta(xp, t), bfun(xp, t)
        G = 1 + c * e + a * e * e
        tG = (c + 2 * a * e) * 0.5 * (B + e * e)  # t dG/dt
        return amp * r ** (-p) * ((1 - p) * G + tG)

    return RadialField(coeff, derivative)


def vector_field_lower_bound_check(profile, dom, params, field):
    """``int |grad u|^p - int (div T - (p-1)|T|^(p/(p-1))) |u|^p``; never negative.

    Evaluated in physical variables, so intended for profiles whose support
    keeps ``r`` and ``u`` representable.
    """
    from .geometry import laplacian_distance

    if profile.level != 1:
        raise ParameterError("vector-field check works on level-1 profiles")
    p = params.p
    tau, wt = gauss_nodes(profile.cells)
    y = np.expm1(tau)
    r = profile.D * np.exp(-y)
    inside = (r > 0) & (r < dom.delta)
    tau, wt, y, r = tau[inside], wt[inside], y[inside], r[inside]
    jac = np.exp(tau)
    v = profile.v(tau)
    vy = profile.dv_dtau(tau) / jac
    h = profile.shift
    u = np.exp(h * y) * v
    ur = -np.exp(h * y) * (vy + h * v) / r
    T = field.coeff(r)
    divT = field.derivative(r) + T * laplacian_distance(dom, r)
    V = divT - (p - 1) * np.abs(T) ** (p / (p - 1))
    mu = dom.constant * r ** (dom.k - 1) * dom.rho(r)
    integrand = (np.abs(ur) ** p - V * np.abs(u) ** p) * mu * r  # dr = r dy
    return float(np.dot(wt * jac, integrand))


# -- elementary inequality ------------------------------------------------------------

def elementary_cp(p):
    """Constant ``c_p = p 2^(p-1)`` in ``|a+b|^p <= |a|^p + c_p(|a|^(p-1)|b| + |b|^p)``."""
    return p * 2.0 ** (p - 1)


def elementary_inequality_margin(a, b, p):
    """Right side minus left side of the elementary inequality (vectors along last axis)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a, axis=-1) if a.ndim > 1 else np.abs(a)
    nb = np.linalg.norm(b, axis=-1) if b.ndim > 1 else np.abs(b)
    nab = np.linalg.norm(a + b, axis=-1) if a.ndim > 1 else np.abs(a + b)
    cp = elementary_cp(p)
    return na**p + cp * (na ** (p - 1) * nb + nb**p) - nab**p
