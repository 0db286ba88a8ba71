"""Grid certification of the pointwise inequalities behind the Hardy series.

For the main family the vector field

    T = H|H|^(p-2) d^(1-p) G(d/D) grad d,   G = 1 + (p-1)/(pH) eta + a eta^2,

turns the inequality into the scalar statement ``f(B, eta) - (p-1) g(eta) >= 0``.
Both sides agree to second order at ``eta = 0``, so the margin is evaluated
in the cancellation-free form

    margin / (p-1) = a/((p-1)H) (B + eta^2) eta
                     - q(q-1)/2 a eta^2 (2c eta + a eta^2) - R_3(b),

with ``q = p/(p-1)``, ``c = (p-1)/(pH)``, ``b = c eta + a eta^2`` and
``R_3`` the third-order binomial remainder of ``(1+b)^q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _binomial
from .exceptions import DomainError, NoAdmissibleA, NotFound, ParameterError
from .functionals import HardyParams
from .geometry import _flatness
from .special_functions import eta_and_b_from_log, x_stack_from_log

DEFAULT_A_GRID = tuple(10.0**j for j in range(-2, 4))
DEFAULT_D_FACTORS = (1.0, 2.0, 4.0, 16.0, 256.0, 65536.0)


class Verdict(str, enum.Enum):
    CERTIFIED = "Certified"
    FALSIFIED = "Falsified"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CaseSelector:
    """Case label ``a``-``d`` from the signs of ``H`` and ``p - 2``, and the free parameter."""

    case: str
    a_value: float = 0.0

    def __post_init__(self):
        if self.case not in ("a", "b", "c", "d"):
            raise ParameterError(f"unknown case {self.case!r}")

    @staticmethod
    def case_for(p, H):
        if H == 0:
            raise ParameterError("H = 0 (p = k) belongs to the degenerate family")
        if H > 0:
            return "a" if p < 2 else "b"
        return "c" if p < 2 else "d"

    @classmethod
    def for_params(cls, params, a=None):
        case = cls.case_for(params.p, params.H)
        if a is None:
            a = 0.0
        return cls(case, float(a))


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced nodes on ``[t_min, t_max]``; ``t_max`` defaults to ``sup_d / D``."""

    n: int = 2000
    t_min: float = 1e-12
    t_max: Optional[float] = None
    refine_factor: int = 10

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("grid needs at least two nodes")
        if not 0 < self.t_min:
            raise ParameterError("t_min must be positive")
        if self.refine_factor < 1:
            raise ParameterError("refine_factor must be >= 1")

    def nodes(self, t_max):
        if not self.t_min < t_max <= 1.0:
            raise ParameterError(f"need t_min < t_max <= 1, got t_max={t_max}")
        return np.geomspace(self.t_min, t_max, self.n)


@dataclass
class CertificateReport:
    params: dict
    grid: dict
    min_margin: float
    argmin_t: float
    D_used: float
    a_used: float
    verdict: Verdict
    refined_min_margin: float = math.nan
    case: str = ""

    @property
    def certified(self):
        return self.verdict is Verdict.CERTIFIED

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


# -- scalar pieces ------------------------------------------------------------------

def f_val(B, eta, p, H, a):
    """``f(B, eta)``, the lower bound of ``div T`` in units of ``|H|^p / d^p``."""
    B = np.asarray(B, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return ((p - 1) + (p - 1) / H * eta + (p * a + (p - 1) / (2 * p * H * H)) * eta**2
            + a / H * B * eta + a / H * eta**3)


def _base(eta, p, H, a):
    return 1.0 + (p - 1) / (p * H) * eta + a * eta * eta


def g_val(eta, p, H, a):
    """``g(eta) = (1 + (p-1)/(pH) eta + a eta^2)^(p/(p-1))``."""
    base = _base(np.asarray(eta, dtype=float), p, H, a)
    if np.any(~(base > 0)):
        raise DomainError("base of g is not positive")
    return base ** (p / (p - 1))


def _stable_margin(eta, B, p, H, a):
    """``f - (p-1) g`` without cancellation; ``nan`` where the base is not positive."""
    q = p / (p - 1)
    c = (p - 1) / (p * H)
    b = c * eta + a * eta * eta
    ok = 1.0 + b > 0
    rem = np.full_like(eta, np.nan)
    rem[ok] = _binomial.remainder(b[ok], q, 3)
    main = a / ((p - 1) * H) * (B + eta * eta) * eta
    quad = 0.5 * q * (q - 1) * a * eta * eta * (2 * c * eta + a * eta * eta)
    return (p - 1) * (main - quad - rem)


def _eta_b(t, m):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)) or np.any(~(t <= 1)):
        raise DomainError("t must lie in (0, 1]")
    return eta_and_b_from_log(-np.log(t), m)


def pointwise_margin(t, params, sel):
    """``f(B(t), eta(t)) - (p-1) g(eta(t))`` at ``t = d/D``."""
    if params.degenerate:
        raise ParameterError("p == k: use certify_degenerate")
    if params.m < 1:
        raise ParameterError("margin needs m >= 1")
    eta, B = _eta_b(t, params.m)
    out = _stable_margin(np.atleast_1d(eta), np.atleast_1d(B), params.p, params.H, sel.a_value)
    if np.any(np.isnan(out)):
        raise DomainError("base of g is not positive")
    return out if np.ndim(t) else float(out[0])


def divergence_form_margin(t, params, sel, dom):
    """``(div T - (p-1)|T|^q) d^p/|H|^p - (1 + (p-1)/(2pH^2) B)`` from the field itself.

    Uses the geometry's ``d Laplacian(d)``; on flat models it coincides with
    :func:`pointwise_margin`; where the curvature condition on Laplacian(d) holds it
    only adds to it.
    """
    p, H, a = params.p, params.H, sel.a_value
    t = np.asarray(t, dtype=float)
    eta, B = _eta_b(t, params.m)
    c = (p - 1) / (p * H)
    G = 1.0 + c * eta + a * eta * eta
    if np.any(~(G > 0)):
        raise DomainError("base of g is not positive")
    tG = (c + 2 * a * eta) * 0.5 * (B + eta * eta)
    flat = _flatness(dom, t * params.D)
    divT = p * G + tG / H + flat * G / H
    return divT - (p - 1) * G ** (p / (p - 1)) - 1.0 - (p - 1) / (2 * p * H * H) * B


def taylor_bound_check_p_ge_2(p, H, eta_grid):
    """Largest value of ``g(eta) - (1 + eta/H + eta^2/(2pH^2))`` at ``a = 0``; never positive."""
    if p < 2 or H <= 0:
        raise ParameterError("check applies to p >= 2 and H > 0")
    eta = np.asarray(eta_grid, dtype=float)
    b = (p - 1) / (p * H) * eta
    if np.any(~(1.0 + b > 0)):
        raise DomainError("base of g is not positive")
    return float(np.max(_binomial.remainder(b, p / (p - 1), 3)))


# -- certification ------------------------------------------------------------------------

def _certify(margin_fn, t_max, grid, summary, D, a, case):
    t = grid.nodes(t_max)
    m = margin_fn(t)
    gd = asdict(grid)
    gd["t_max"] = t_max
    bad = np.isnan(m)
    if np.any(bad):
        i = int(np.argmax(bad))
        return CertificateReport(summary, gd, -math.inf, float(t[i]), D, a, Verdict.FALSIFIED,
                                 case=case)
    i = int(np.argmin(m))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    fine = np.geomspace(lo, hi, 2 * grid.refine_factor + 1)
    mf = margin_fn(fine)
    refined = -math.inf if np.any(np.isnan(mf)) else float(np.min(mf))
    base = float(m[i])
    if (base >= 0) != (refined >= 0):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.CERTIFIED if base >= 0 else Verdict.FALSIFIED
    return CertificateReport(summary, gd, base, float(t[i]), D, a, verdict, refined, case)


def certify_main(params, sel, grid=None, sup_d=1.0):
    """Minimum of :func:`pointwise_margin` over a log grid of ``t`` in ``(0, sup_d/D]``."""
    grid = grid or GridSpec()
    if params.degenerate:
        raise ParameterError("p == k: use certify_degenerate")
    if params.m < 1:
        raise ParameterError("certification needs m >= 1")
    if params.D < sup_d:
        raise ParameterError("D must be at least sup d")
    t_max = grid.t_max if grid.t_max is not None else sup_d / params.D
    eta_b = lambda t: _eta_b(t, params.m)

    def margin(t):
        eta, B = eta_b(t)
        return _stable_margin(eta, B, params.p, params.H, sel.a_value)

    summary = dict(N=params.N, k=params.k, p=params.p, m=params.m, H=params.H)
    return _certify(margin, t_max, grid, summary, params.D, sel.a_value, sel.case)


def _with_D(params, D):
    return HardyParams(params.N, params.k, params.p, params.m, D)


def choose_a(params, candidates=DEFAULT_A_GRID, D=None, grid=None, sup_d=1.0):
    """Case label and the smallest-``|a|`` candidate that certifies at scale ``D``.

    Candidates are taken by absolute value with the sign of ``H``; cases b
    and c return ``a = 0`` without searching.
    """
    case = CaseSelector.case_for(params.p, params.H)
    if case in ("b", "c"):
        return CaseSelector(case, 0.0)
    if len(candidates) == 0:
        raise ParameterError("candidate grid is empty")
    P = _with_D(params, D if D is not None else params.D)
    sign = 1.0 if params.H > 0 else -1.0
    for mag in sorted({abs(float(a)) for a in candidates if a != 0}):
        sel = CaseSelector(case, sign * mag)
        if certify_main(P, sel, grid, sup_d).certified:
            return sel
    raise NoAdmissibleA(f"no candidate a certifies case {case} at D={P.D}")


def find_D0(params, sel, sup_d=1.0, max_factor=65536.0, grid=None, rel_tol=1e-3):
    """Smallest ``D`` in ``[sup_d, max_factor sup_d]`` that certifies, by log bisection."""
    if max_factor < 1:
        raise ParameterError("max_factor must be >= 1")
    ok = lambda D: certify_main(_with_D(params, D), sel, grid, sup_d).certified
    if ok(sup_d):
        return float(sup_d)
    hi = max_factor * sup_d
    if not ok(hi):
        raise NotFound(f"no certificate up to D={hi}")
    lo = float(sup_d)
    while hi / lo > 1 + rel_tol:
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class AutoResult:
    selector: CaseSelector
    D0: float
    report: CertificateReport


def auto_certify(params, sup_d=1.0, candidates=DEFAULT_A_GRID, factors=DEFAULT_D_FACTORS,
                 grid=None):
    """Search ``D`` factors for an admissible ``a``, then shrink ``D`` by bisection."""
    last = None
    for f in factors:
        D = f * sup_d
        try:
            sel = choose_a(params, candidates, D, grid, sup_d)
        except NoAdmissibleA as exc:
            last = exc
            continue
        if sel.case in ("b", "c") and not certify_main(_with_D(params, D), sel, grid,
                                                       sup_d).certified:
            continue
        D0 = find_D0(params, sel, sup_d, D / sup_d, grid)
        return AutoResult(sel, D0, certify_main(_with_D(params, D0), sel, grid, sup_d))
    raise NotFound(f"no (a, D) pair certifies up to D={factors[-1] * sup_d}") from last


# -- degenerate family ---------------------------------------------------------------------

def _degenerate_parts(xs):
    """Exact ``P - S^2/2 - Sigma/2`` and float ``S`` from ``X_2 .. X_m`` (rows)."""
    n = xs.shape[0]
    poly = np.empty(xs.shape[1])
    S = np.empty(xs.shape[1])
    half = Fraction(1, 2)
    for col in range(xs.shape[1]):
        x = [Fraction(float(v)) for v in xs[:, col]]
        s = Fraction(0)
        P = Fraction(0)
        sig = Fraction(0)
        for i in range(n):
            prod = Fraction(1)
            for l in range(i + 1):
                prod *= x[l]
            s += prod
            sq = prod * prod
            sig += sq
            for j in range(i + 1):
                term = Fraction(1)
                for l in range(j + 1):
                    term *= x[l] * x[l]
                for l in range(j + 1, i + 1):
                    term *= x[l]
                P += term
        poly[col] = float(P - half * s * s - half * sig)
        S[col] = float(s)
    return poly, S


def degenerate_margin(t, k, m):
    """Difference of the two sides of the degenerate chain, divided by ``X_1^k / d^k``."""
    if k < 2 or m < 2:
        raise ParameterError("degenerate margin needs k >= 2 and m >= 2")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    xs = x_stack_from_log(-np.log(t), m)[1:]
    poly, S = _degenerate_parts(xs)
    R3 = _binomial.remainder(S, k / (k - 1), 3)
    return ((k - 1) / k) ** (k - 1) * (poly - (k - 1) ** 2 / k * R3)


def degenerate_margin_direct(t, k, m):
    """Same margin from the unexpanded inner/target expressions (oracle, cancels at t -> 0)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    xs = x_stack_from_log(-np.log(t), m)[1:]
    n = xs.shape[0]
    prods = np.cumprod(xs, axis=0)
    S = prods.sum(axis=0)
    sig = np.cumprod(xs**2, axis=0).sum(axis=0)
    P = np.zeros_like(S)
    for i in range(n):
        for j in range(i + 1):
            P += np.prod(xs[: j + 1] ** 2, axis=0) * np.prod(xs[j + 1: i + 1], axis=0)
    inner = (k - 1) ** k / k ** (k - 1) * (1 + S + P / (k - 1)
                                           - (k - 1) / k * (1 + S) ** (k / (k - 1)))
    target = ((k - 1) / k) ** (k - 1) * ((k - 1) / k + 0.5 * sig)
    return inner - target


def certify_degenerate(k, m, D=1.0, grid=None, sup_d=1.0):
    grid = grid or GridSpec()
    if D < sup_d:
        raise ParameterError("D must be at least sup d")
    t_max = grid.t_max if grid.t_max is not None else sup_d / D
    summary = dict(k=k, p=float(k), m=m)
    return _certify(lambda t: degenerate_margin(t, k, m), t_max, grid, summary, D, 0.0,
                    "degenerate")
