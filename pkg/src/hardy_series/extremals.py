"""Test-function family, auxiliary integrals and sharpness sweeps.

The family is ``u = phi(d) w(d)`` with

    w = d^(-H + a0/p) X_1^((-1+a1)/p) ... X_m^((-1+am)/p)

for the main family and ``w = X_1^((-k+1+a1)/k) X_2^((-1+a2)/k) ...`` when
``p = k``.  In the reduced variables of :mod:`functionals` (level ``l`` log
coordinate ``y``) both read ``v = phi * psi`` with

    psi = exp(-a0 y/p) prod_j X^(l)_j^((-1+a_j)/p),    X^(l)_j = X_(l-1+j),
    v'  = psi (phi' + phi zeta/p),   zeta = -a0 + sum_j (1-a_j) X^(l)_1...X^(l)_j,

where ``(a0, a_1, ...)`` is ``(alpha_0, alpha_1, ...)`` in the main family and
``(alpha_1, alpha_2, ...)`` in the degenerate one.  Every integral of the
quotient is then an instance of the canonical singular family and is
evaluated exactly down to ``d = 0``.  Setting ``a0 = 0`` exactly gives the
limit ``a0 -> 0`` of the quotient: in reduced form the divergent energies
have already cancelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _binomial
from .exceptions import IntegrabilityError, ParameterError
from .functionals import HardyParams, RadialProfile, energy_density
from .quadrature import (BetaExponents, Finiteness, adaptive_gk, classify_finiteness,
                         log_points, singular_radial_integral)
from .special_functions import x_stack

SWEEP_REL_TOL = 1e-9
DEFAULT_FINALS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
DEFAULT_RATIO = 10.0
DEFAULT_DEPTH_Y = 700.0


@dataclass(frozen=True)
class AlphaVector:
    """Parameters ``(alpha_0, ..., alpha_m)``; a zero entry means the limit value."""

    alphas: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.alphas)
        if len(a) < 2:
            raise ParameterError("need at least (alpha_0, alpha_1)")
        if any(not x >= 0 for x in a):
            raise ParameterError("alpha entries must be nonnegative")
        object.__setattr__(self, "alphas", a)

    @property
    def m(self):
        return len(self.alphas) - 1

    def __getitem__(self, i):
        return self.alphas[i]

    def replace(self, i, value):
        a = list(self.alphas)
        a[i] = value
        return AlphaVector(tuple(a))


@dataclass(frozen=True)
class CutoffSpec:
    """``phi = 1`` on ``[0, delta/2]``, cosine blend to 0 at ``delta`` (C^1)."""

    delta: float = 0.5

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError("cutoff radius must be positive")

    @classmethod
    def for_domain(cls, dom):
        return cls(min(dom.delta, 0.5))

    @property
    def plateau(self):
        return 0.5 * self.delta

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        x = np.clip(2.0 * r / self.delta - 1.0, 0.0, 1.0)
        return 0.5 * (1.0 + np.cos(np.pi * x))

    def dphi(self, r):
        """``d phi / dr``."""
        r = np.asarray(r, dtype=float)
        x = 2.0 * r / self.delta - 1.0
        inside = (x > 0) & (x < 1)
        return np.where(inside, -np.pi / self.delta * np.sin(np.pi * np.clip(x, 0, 1)), 0.0)


def zeta(t, alpha):
    """``-alpha_0 + (1-alpha_1) X_1 + ... + (1-alpha_m) X_1...X_m`` at ``t``."""
    xs = x_stack(t, alpha.m)
    prods = np.cumprod(xs, axis=0)
    coef = np.array([1.0 - a for a in alpha.alphas[1:]]).reshape((-1,) + (1,) * (xs.ndim - 1))
    return -alpha[0] + (coef * prods).sum(axis=0)


# -- the reduced family ---------------------------------------------------------------

@dataclass(frozen=True)
class _Family:
    level: int
    h: float
    p: float
    a0: float
    a: tuple          # a_1 .. a_M, attached to X_l .. X_m
    D: float
    cutoff: CutoffSpec
    prefactor: float = 1.0

    @property
    def M(self):
        return len(self.a)

    @property
    def depth(self):
        return self.level - 1 + self.M

    def parts(self, pts):
        """``(phi, phi_y, zeta)`` on a :func:`log_points` namespace."""
        lv = self.level
        r = pts.r
        phi = self.cutoff.phi(r)
        phi_y = -r * self.cutoff.dphi(r)
        if lv > 1:
            with np.errstate(divide="ignore", invalid="ignore"):
                phi_y = np.where(phi_y == 0, 0.0, phi_y / np.prod(pts.xs[: lv - 1], axis=0))
        prods = np.cumprod(pts.xs[lv - 1: lv - 1 + self.M], axis=0)
        coef = np.array([1.0 - aj for aj in self.a])[:, None]
        z = -self.a0 + (coef * prods.reshape(self.M, -1)).sum(axis=0).reshape(r.shape)
        return phi, phi_y, z

    def log_psi(self, y, pts):
        out = -self.a0 * y / self.p
        for j, aj in enumerate(self.a):
            out = out + (-1.0 + aj) / self.p * pts.logx[self.level - 1 + j]
        return out + math.log(self.prefactor)

    def profile(self, tau):
        y = np.expm1(tau)
        pts = log_points(y, self.level, self.depth, self.D)
        phi, phi_y, z = self.parts(pts)
        psi = np.exp(self.log_psi(y, pts))
        return psi * phi, psi * (phi_y + phi * z / self.p) * np.exp(tau)


def _main_family(params, alpha, cutoff):
    if params.degenerate:
        raise ParameterError("p == k: use the degenerate family")
    if alpha.m != params.m:
        raise ParameterError(f"alpha has depth {alpha.m}, params have m={params.m}")
    return _Family(1, params.H, params.p, alpha[0], alpha.alphas[1:], params.D, cutoff,
                   params.D ** (-params.H))


def _degenerate_family(k, alpha, cutoff, D):
    if alpha.m < 1:
        raise ParameterError("degenerate family needs alpha_1")
    if alpha.m >= 2:
        a = alpha.alphas[2:]
    else:
        a = ()
    if len(a) == 0:
        raise ParameterError("degenerate family needs m >= 2")
    return _Family(2, (k - 1) / k, float(k), alpha[1], a, D, cutoff)


def _tau_mesh(fam, n, y_max):
    lo = -math.log(fam.cutoff.delta / fam.D)
    mid = -math.log(fam.cutoff.plateau / fam.D)
    if fam.level == 2:
        lo, mid = math.log1p(lo), math.log1p(mid)
        y_max = math.log1p(y_max)
    t_lo, t_mid, t_hi = math.log1p(lo), math.log1p(mid), math.log1p(y_max)
    n_tr = max(n // 5, 8)
    tau = np.concatenate([np.linspace(t_lo, t_mid, n_tr, endpoint=False),
                          np.linspace(t_mid, t_hi, n - n_tr)])
    return tau, np.array([t_lo, t_mid, t_hi])


def _denominator_betas(fam, gamma):
    betas = [0.0] * (fam.level - 1) + [aj for aj in fam.a]
    betas[-1] = gamma - 2.0 + fam.a[-1]
    if fam.level == 1:
        return fam.a0, tuple(betas)
    betas[fam.level - 2] = fam.a0
    return 0.0, tuple(betas)


def _numerator_betas(fam):
    betas = [0.0] * (fam.level - 1) + [-2.0 + aj for aj in fam.a]
    betas[fam.level - 1] = fam.a[0]
    if fam.level == 1:
        return fam.a0, tuple(betas)
    betas[fam.level - 2] = fam.a0
    return 0.0, tuple(betas)


def _wrap(fam, n, y_max, func_breaks=True):
    tau, breaks = _tau_mesh(fam, n, y_max)
    f = lambda t: fam.profile(t)[0]
    df = lambda t: fam.profile(t)[1]
    cells = np.unique(np.concatenate([tau, breaks]))
    return RadialProfile.from_function(tau, f, df, level=fam.level, shift=fam.h, D=fam.D,
                                       boundary_zero=(True, False), breaks=cells)


def test_profile(params, alpha, cutoff, gamma=2.0, n=400, y_max=DEFAULT_DEPTH_Y):
    """The profile ``u = phi w`` as an analytic :class:`RadialProfile`.

    The mesh runs from the cutoff radius to ``y = -log(r/D) = y_max``; the
    profile itself does not vanish there, so mesh-based functionals see a
    truncation.  Sweeps integrate the family exactly instead.
    """
    fam = _main_family(params, alpha, cutoff)
    b0, betas = _denominator_betas(fam, gamma)
    if classify_finiteness(BetaExponents(b0, betas, cutoff.delta, params.D)) is Finiteness.INFINITE:
        raise IntegrabilityError("denominator of the quotient diverges for this alpha")
    return _wrap(fam, n, y_max)


test_profile.__test__ = False  # keep pytest from collecting it


def test_profile_degenerate(k, alpha, cutoff, gamma=2.0, D=1.0, n=400, y_max=50.0):
    """The degenerate profile at log level 2 (``y = log(1 - log(r/D))``)."""
    fam = _degenerate_family(k, alpha, cutoff, D)
    b0, betas = _denominator_betas(fam, gamma)
    if classify_finiteness(BetaExponents(b0, betas, cutoff.delta, D)) is Finiteness.INFINITE:
        raise IntegrabilityError("denominator of the quotient diverges for this alpha")
    return _wrap(fam, n, y_max)


test_profile_degenerate.__test__ = False


# -- exact quotients ---------------------------------------------------------------------

@dataclass
class SweepPoint:
    alpha: tuple
    numerator: float
    denominator: float
    quotient: float


def _family_quotient(fam, dom, gamma, series_constant, rel_tol=SWEEP_REL_TOL):
    lv, p, h = fam.level, fam.p, fam.h
    C = dom.constant * fam.D ** (dom.k - p) * fam.prefactor**p * fam.D ** (-fam.a0 if lv == 1 else 0)
    M = fam.M

    def num_smooth(pts):
        # the integrand divided by X_l^2, written so the deep end (X_l -> 0) is exact
        phi, phi_y, z = fam.parts(pts)
        xl = pts.xs[lv - 1]
        tail = np.cumprod(pts.xs[lv: lv - 1 + M], axis=0)
        coef = np.array([1.0 - aj for aj in fam.a[1:]])[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            zhat = np.full_like(xl, 1.0 - fam.a[0]) - (fam.a0 / xl if fam.a0 else 0.0)
            if M > 1:
                zhat = zhat + (coef * tail.reshape(M - 1, -1)).sum(axis=0).reshape(xl.shape)
            rho = dom.rho(pts.r)
            rho_y = dom.rho_log_derivative(pts.r)
            if lv > 1:
                rho_y = np.where(rho_y == 0, 0.0, rho_y / np.prod(pts.xs[: lv - 1], axis=0))
            rho_y = np.where(rho_y == 0, 0.0, rho_y / xl**2)
            flat = phi_y == 0
            eps = z[flat] / (p * h)
            F = np.empty_like(phi)
            F[flat] = (phi[flat] ** p * abs(h) ** p * (zhat[flat] / (p * h)) ** 2
                       * _binomial.remainder_ratio(eps, p, 2))
            F[~flat] = energy_density(phi[~flat], phi_y[~flat] + phi[~flat] * z[~flat] / p,
                                      h, p) / xl[~flat] ** 2
        R = (tail[: M - 2] ** 2).sum(axis=0) + 1.0 if M > 1 else 0.0
        return (F * rho - h * abs(h) ** (p - 2) * phi**p * rho_y
                - series_constant * phi**p * rho * R)

    def den_smooth(pts):
        return fam.cutoff.phi(pts.r) ** p * dom.rho(pts.r)

    breaks = (fam.cutoff.plateau,)
    bn = BetaExponents(*_numerator_betas(fam), delta=fam.cutoff.delta, D=fam.D)
    bd = BetaExponents(*_denominator_betas(fam, gamma), delta=fam.cutoff.delta, D=fam.D)
    if classify_finiteness(bd) is Finiteness.INFINITE:
        raise IntegrabilityError(f"denominator exponents {bd.all} diverge")
    if classify_finiteness(bn) is Finiteness.INFINITE:
        raise IntegrabilityError(f"numerator exponents {bn.all} diverge")
    num = C * singular_radial_integral(bn, num_smooth, rel_tol, fam.depth, breaks)
    den = C * singular_radial_integral(bd, den_smooth, rel_tol, fam.depth, breaks)
    return num, den


def family_quotient(params, alpha, cutoff, dom, gamma=2.0, rel_tol=SWEEP_REL_TOL):
    """Exact Rayleigh quotient of the test function (main family)."""
    params.check_domain(dom)
    fam = _main_family(params, alpha, cutoff)
    num, den = _family_quotient(fam, dom, gamma, params.series_constant, rel_tol)
    return SweepPoint(alpha.alphas, num, den, num / den)


def family_quotient_degenerate(k, alpha, cutoff, dom, gamma=2.0, D=1.0, rel_tol=SWEEP_REL_TOL):
    """Exact degenerate quotient of the test function."""
    params = HardyParams(dom.N, k, float(k), alpha.m, D)
    params.check_domain(dom)
    fam = _degenerate_family(k, alpha, cutoff, D)
    num, den = _family_quotient(fam, dom, gamma, params.series_constant, rel_tol)
    return SweepPoint(alpha.alphas, num, den, num / den)


def ordered_schedule(m, finals=DEFAULT_FINALS, ratio=DEFAULT_RATIO, first=0):
    """Alpha vectors zeroing parameters in order.

    Entries before ``first`` are set to their limit value 0; the remaining
    ones are ``f / ratio^(m-i)`` so each is ``ratio`` times smaller than the
    next, with the last one equal to ``f`` for every ``f`` in ``finals``.
    """
    out = []
    for f in finals:
        a = [0.0] * (m + 1)
        for i in range(max(first, 1), m + 1):
            a[i] = f / ratio ** (m - i)
        out.append(AlphaVector(tuple(a)))
    return out


def gamma_offset_schedule(m, gamma, offsets, ratio=DEFAULT_RATIO, first=0, base=1e-3):
    """Vectors with ``alpha_m = (2 - gamma) + eps``, so the denominator exponent is ``eps``."""
    out = []
    for eps in offsets:
        a = [0.0] * (m + 1)
        for i in range(max(first, 1), m):
            a[i] = base / ratio ** (m - 1 - i)
        a[m] = (2.0 - gamma) + eps
        out.append(AlphaVector(tuple(a)))
    return out


def sharpness_sweep(params, gamma, cutoff, schedule, dom, rel_tol=SWEEP_REL_TOL):
    """Quotients of the test family along ``schedule`` (main or degenerate family)."""
    rows = []
    for alpha in schedule:
        if params.degenerate:
            rows.append(family_quotient_degenerate(params.k, alpha, cutoff, dom, gamma,
                                                   params.D, rel_tol))
        else:
            rows.append(family_quotient(params, alpha, cutoff, dom, gamma, rel_tol))
    return rows


# -- auxiliary integrals -----------------------------------------------------------------

def _aux_betas(alpha, i, j):
    """Exponents of ``Gamma_ij`` (``A_i`` when ``i == j``)."""
    a = alpha.alphas
    m = alpha.m
    betas = []
    for l in range(1, m + 1):
        if l <= i:
            betas.append(a[l])
        elif l <= j:
            betas.append(-1.0 + a[l])
        else:
            betas.append(-2.0 + a[l])
    return a[0], tuple(betas)


def auxiliary_integral(params, alpha, cutoff, dom, i, j=None, rel_tol=SWEEP_REL_TOL):
    """``A_i`` (``j`` omitted or equal to ``i``) or ``Gamma_ij``; ``inf`` when divergent."""
    j = i if j is None else j
    if not 0 <= i <= j <= alpha.m:
        raise ParameterError("need 0 <= i <= j <= m")
    b = BetaExponents(*_aux_betas(alpha, i, j), delta=cutoff.delta, D=params.D)
    if classify_finiteness(b) is Finiteness.INFINITE:
        return math.inf
    smooth = lambda pts: cutoff.phi(pts.r) ** params.p * dom.rho(pts.r)
    return dom.constant * singular_radial_integral(b, smooth, rel_tol, alpha.m, (cutoff.plateau,))


def auxiliary_integrals(params, alpha, cutoff, dom, rel_tol=SWEEP_REL_TOL):
    """All ``A_i`` and ``Gamma_ij`` (``0 <= i < j <= m``), keyed ``"A{i}"`` and ``"G{i}{j}"``."""
    if params.degenerate:
        raise ParameterError("auxiliary integrals are defined for the main family")
    out = {}
    for i in range(alpha.m + 1):
        out[f"A{i}"] = auxiliary_integral(params, alpha, cutoff, dom, i, rel_tol=rel_tol)
        for j in range(i + 1, alpha.m + 1):
            out[f"G{i}{j}"] = auxiliary_integral(params, alpha, cutoff, dom, i, j, rel_tol)
    return out


@dataclass
class ProbeRow:
    alpha_i: float
    A_i: float
    residual: float


def identity_residual(params, alpha, cutoff, dom, i, rel_tol=SWEEP_REL_TOL):
    """``alpha_i A_i - sum_{j>i} (1 - alpha_j) Gamma_ij``."""
    if any(alpha[l] != 0 for l in range(i)):
        raise ParameterError("identity needs alpha_0 = ... = alpha_{i-1} = 0")
    Ai = auxiliary_integral(params, alpha, cutoff, dom, i, rel_tol=rel_tol)
    total = alpha[i] * Ai
    for j in range(i + 1, alpha.m + 1):
        total -= (1.0 - alpha[j]) * auxiliary_integral(params, alpha, cutoff, dom, i, j, rel_tol)
    return Ai, total


def identity_residual_boundary(params, alpha, cutoff, dom, i, rel_tol=1e-11):
    """The residual as the cutoff-transition integral it equals on flat geometries.

    ``-c int (phi^p)'(r) r^(alpha_0 [i=0]) X_i^alpha_i prod_{j>i} X_j^(-1+alpha_j) dr``.
    """
    if dom.kind == "boundary":
        raise ParameterError("closed form holds on flat geometries only")
    p = params.p

    def f(r):
        xs = x_stack(r / params.D, alpha.m)
        val = -p * cutoff.phi(r) ** (p - 1) * cutoff.dphi(r)
        if i == 0:
            val = val * r ** alpha[0]
        else:
            val = val * xs[i - 1] ** alpha[i]
        for j in range(i + 1, alpha.m + 1):
            val = val * xs[j - 1] ** (-1.0 + alpha[j])
        return val

    return dom.constant * adaptive_gk(f, cutoff.plateau, cutoff.delta, rel_tol=rel_tol).value


def identity_boundedness_probe(params, i, schedule, cutoff, dom, base=None,
                               rel_tol=SWEEP_REL_TOL):
    """Residuals of the first identity along decreasing values of ``alpha_i``.

    ``base`` supplies the other entries (default: zeros before ``i``, 0.5 after).
    """
    if base is None:
        base = AlphaVector(tuple([0.0] * (i + 1) + [0.5] * (params.m - i)))
    rows = []
    for ai in schedule:
        alpha = base.replace(i, ai)
        Ai, res = identity_residual(params, alpha, cutoff, dom, i, rel_tol)
        rows.append(ProbeRow(ai, Ai, res))
    return rows
