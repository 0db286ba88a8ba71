"""Direct minimisation of the Rayleigh quotients over discrete radial profiles.

Profiles live in the reduced form of :mod:`functionals`, discretised by
continuous piecewise-cubic Lagrange elements on a uniform mesh in
``tau = log(1 + y)``.  Doubling the element count gives nested spaces, so
the computed minima are nonincreasing under refinement.

``p = 2`` reduces to a banded generalised eigenproblem solved by inverse
iteration; other ``p`` use L-BFGS on the quotient with an exact gradient.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import minimize

from .exceptions import ConvergenceError, ParameterError
from .functionals import (GAUSS_POINTS, HardyParams, RadialProfile, energy_density,
                          energy_density_grad, outer_coordinate, reduced_points, reduced_weights)

DEFAULT_LENGTH = 40.0
DEFAULT_STARTS = 8
EIG_TOL = 1e-14
EIG_MAX_ITER = 20000
RESIDUAL_TOL = 1e-10

_GX, _GW = np.polynomial.legendre.leggauss(GAUSS_POINTS)
_XI = 0.5 * (_GX + 1.0)          # Gauss points on [0, 1]
_WI = 0.5 * _GW
_LNODES = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


def _lagrange(x):
    """Cubic Lagrange basis on [0, 1] (4 equispaced nodes) and its derivative."""
    x = np.asarray(x, dtype=float)
    val = np.ones((x.size, 4))
    der = np.zeros((x.size, 4))
    for i, xi in enumerate(_LNODES):
        others = [xj for j, xj in enumerate(_LNODES) if j != i]
        den = np.prod([xi - xj for xj in others])
        val[:, i] = np.prod([x - xj for xj in others], axis=0) / den
        d = np.zeros_like(x)
        for a in range(3):
            term = np.ones_like(x)
            for b in range(3):
                if b != a:
                    term = term * (x - others[b])
            d = d + term
        der[:, i] = d / den
    return val, der


_BV, _BD = _lagrange(_XI)


@dataclass(frozen=True)
class DiscreteSpace:
    """Cubic elements on ``[tau0, tau0 + length]``; zero at the deep end.

    The outer end is pinned to zero unless ``free_start`` (used when the
    outer boundary is part of the singular set, e.g. the ball boundary).
    """

    n_el: int
    tau0: float = 0.0
    length: float = DEFAULT_LENGTH
    level: int = 1
    shift: float = 0.0
    D: float = 1.0
    free_start: bool = False

    def __post_init__(self):
        if self.n_el < 1:
            raise ParameterError("need at least one element")
        if not self.length > 0:
            raise ParameterError("length must be positive")

    @classmethod
    def for_problem(cls, dom, params, dofs=500, length=DEFAULT_LENGTH):
        """Space with about ``dofs`` unknowns for the quotient of ``params`` on ``dom``."""
        level = params.level
        free = dom.kind == "boundary"
        n_el = max(1, math.ceil((dofs + (0 if free else 1)) / 3))
        tau0 = math.log1p(outer_coordinate(dom, params.D, level))
        return cls(n_el, tau0, length, level, params.shift, params.D, free)

    def refine(self):
        return DiscreteSpace(2 * self.n_el, self.tau0, self.length, self.level, self.shift,
                             self.D, self.free_start)

    @property
    def n_nodes(self):
        return 3 * self.n_el + 1

    @property
    def dof_count(self):
        return self.n_nodes - (1 if self.free_start else 2)

    @property
    def first_dof_node(self):
        return 0 if self.free_start else 1

    @property
    def edges(self):
        return self.tau0 + self.length * np.linspace(0.0, 1.0, self.n_el + 1)

    @property
    def nodes(self):
        return self.tau0 + self.length * np.linspace(0.0, 1.0, self.n_nodes)

    @property
    def h(self):
        return self.length / self.n_el

    def quad_points(self):
        tau = (self.edges[:-1, None] + self.h * _XI[None, :]).ravel()
        w = np.tile(_WI * self.h, self.n_el)
        return tau, w

    def basis_matrices(self):
        """Sparse ``(values, d/dtau)`` of the dof basis at the quadrature points."""
        nq = GAUSS_POINTS
        rows = np.repeat(np.arange(self.n_el * nq), 4)
        cols = (3 * np.arange(self.n_el)[:, None, None] + np.arange(4)[None, None, :]
                + 0 * np.arange(nq)[None, :, None]).ravel() - self.first_dof_node
        vals = np.tile(_BV.ravel(), self.n_el)
        ders = np.tile(_BD.ravel(), self.n_el) / self.h
        keep = (cols >= 0) & (cols < self.dof_count)
        shape = (self.n_el * nq, self.dof_count)
        V = sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=shape)
        Dm = sp.csr_matrix((ders[keep], (rows[keep], cols[keep])), shape=shape)
        return V, Dm

    def full_values(self, coeffs):
        out = np.zeros(self.n_nodes)
        out[self.first_dof_node: self.first_dof_node + self.dof_count] = coeffs
        return out

    def profile(self, coeffs):
        """The discrete function as an exact :class:`RadialProfile`."""
        full = self.full_values(coeffs)
        edges, h, n_el = self.edges, self.h, self.n_el

        def locate(t):
            t = np.asarray(t, dtype=float)
            e = np.clip(((t - self.tau0) / h).astype(int), 0, n_el - 1)
            x = (t - edges[e]) / h
            val, der = _lagrange(x.ravel())
            idx = 3 * e.ravel()[:, None] + np.arange(4)[None, :]
            c = full[idx]
            return (val * c).sum(1).reshape(t.shape), (der * c).sum(1).reshape(t.shape) / h

        return RadialProfile.from_function(
            self.nodes, lambda t: locate(t)[0], lambda t: locate(t)[1], self.level, self.shift,
            self.D, (not self.free_start, True), breaks=edges)


# -- assembled weights ---------------------------------------------------------------------

@dataclass
class _Forms:
    V: sp.csr_matrix
    Dm: sp.csr_matrix
    tau: np.ndarray
    wy: np.ndarray        # dy weights
    rho: np.ndarray
    rho_y: np.ndarray
    wnum: np.ndarray      # sum of series weights in the numerator
    wden: np.ndarray      # denominator weight
    h: float
    p: float
    c_series: float
    C: float


def _forms(dom, space, p, h, count, gamma, c_series):
    tau, w = space.quad_points()
    lv = space.level
    y, pts, rho, rho_y = reduced_points(tau, lv, lv + count, space.D, dom)
    R = reduced_weights(pts.xs, lv, count)
    wnum = R.sum(axis=0) if count else np.zeros_like(tau)
    lead = R[-1] if count else np.ones_like(tau)
    wden = lead * pts.xs[lv - 1 + count] ** gamma
    V, Dm = space.basis_matrices()
    C = dom.constant * space.D ** (dom.k - p)
    return _Forms(V, Dm, tau, w * np.exp(tau), rho, rho_y, wnum, wden, h, p, c_series, C)


def _forms_for(dom, params, space, gamma):
    params.check_domain(dom)
    if space.level != params.level or space.shift != params.shift:
        raise ParameterError("space does not match the problem's log level / shift")
    if params.degenerate:
        if params.m < 2:
            raise ParameterError("degenerate quotient needs m >= 2")
        count = params.m - 2
    else:
        if params.m < 1:
            raise ParameterError("quotient needs m >= 1")
        count = params.m - 1
    return _forms(dom, space, params.p, params.shift, count, gamma, params.series_constant)


def _quotient_and_grad(f, c):
    p, h = f.p, f.h
    v = f.V @ c
    vy = (f.Dm @ c) * np.exp(-f.tau)
    av = np.abs(v)
    F = energy_density(v, vy, h, p)
    num = (np.dot(f.wy, F * f.rho) - h * abs(h) ** (p - 2) * np.dot(f.wy, av**p * f.rho_y)
           - f.c_series * np.dot(f.wy, av**p * f.rho * f.wnum))
    den = np.dot(f.wy, av**p * f.rho * f.wden)
    Fv, Fvy = energy_density_grad(v, vy, h, p)
    sv = np.sign(v) * av ** (p - 1)
    gv = f.wy * (Fv * f.rho - p * h * abs(h) ** (p - 2) * sv * f.rho_y
                 - p * f.c_series * sv * f.rho * f.wnum)
    gvy = f.wy * Fvy * f.rho * np.exp(-f.tau)
    gnum = f.V.T @ gv + f.Dm.T @ gvy
    gden = f.V.T @ (p * f.wy * sv * f.rho * f.wden)
    q = num / den
    return q, (gnum - q * gden) / den, num, den


# -- p = 2 eigenproblem -------------------------------------------------------------------

def _to_banded(Msp, u=3):
    n = Msp.shape[0]
    ab = np.zeros((u + 1, n))
    coo = sp.triu(Msp).tocoo()
    ab[u + coo.row - coo.col, coo.col] = coo.data
    return ab


def assemble_p2_eigensystem(dom, params, space, gamma=2.0):
    """Sparse symmetric ``(A, M)``: numerator and denominator quadratic forms (``p = 2``)."""
    if params.p != 2:
        raise ParameterError("eigen assembly needs p = 2")
    f = _forms_for(dom, params, space, gamma)
    ex = np.exp(-f.tau)
    kd = sp.diags(f.wy * f.rho * ex * ex)
    kw = sp.diags(f.wy * (-f.h * f.rho_y - f.c_series * f.rho * f.wnum))
    A = f.C * (f.Dm.T @ kd @ f.Dm + f.V.T @ kw @ f.V)
    M = f.C * (f.V.T @ sp.diags(f.wy * f.rho * f.wden) @ f.V)
    return sp.csr_matrix(0.5 * (A + A.T)), sp.csr_matrix(0.5 * (M + M.T))


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float


def inverse_iteration(A, M, tol=EIG_TOL, max_iter=EIG_MAX_ITER, x0=None):
    """Smallest eigenpair of ``A x = lambda M x`` (``A`` positive definite), shift 0."""
    d = M.diagonal()
    if np.any(d <= 0):
        raise ConvergenceError("mass form is not positive on the basis")
    s = 1.0 / np.sqrt(d)
    S = sp.diags(s)
    As, Ms = S @ A @ S, S @ M @ S
    try:
        cho = sla.cholesky_banded(_to_banded(As))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError("numerator form is not positive definite") from exc
    n = A.shape[0]
    x = np.ones(n) if x0 is None else np.asarray(x0, dtype=float) / s
    x = x / math.sqrt(x @ (Ms @ x))
    lam_old = math.inf
    for it in range(1, max_iter + 1):
        x = sla.cho_solve_banded((cho, False), Ms @ x)
        x = x / math.sqrt(x @ (Ms @ x))
        Ax = As @ x
        lam = float(x @ Ax)
        res = float(np.linalg.norm(Ax - lam * (Ms @ x))) / max(abs(lam), 1e-300)
        if res < RESIDUAL_TOL or (abs(lam - lam_old) <= tol * abs(lam) and res < 1e3 * RESIDUAL_TOL):
            return EigenResult(lam, s * x, it, res)
        lam_old = lam
    raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps")


def smallest_quotient_p2(dom, params, space, gamma=2.0):
    """Smallest quotient over the space for ``p = 2`` (generalised eigenvalue)."""
    A, M = assemble_p2_eigensystem(dom, params, space, gamma)
    return inverse_iteration(A, M).value


def dense_smallest_eigenvalue(A, M):
    """Dense cross-check of :func:`inverse_iteration` (small spaces only)."""
    d = 1.0 / np.sqrt(M.diagonal())
    S = np.diag(d)
    return float(sla.eigh(S @ A.toarray() @ S, S @ M.toarray() @ S, eigvals_only=True)[0])


# -- general p ---------------------------------------------------------------------------------

@dataclass
class DescentResult:
    value: float
    coeffs: np.ndarray
    start_values: list = field(default_factory=list)
    best_start: int = 0
    stalled: bool = False
    message: str = ""


def warm_start(space, p, M):
    """Test-family envelope ``prod X^(-1/p)`` times a sine taper over the mesh."""
    full = space.nodes
    y = np.expm1(full)
    env = np.ones_like(y)
    s = y
    for _ in range(M):
        env = env * (1.0 + s) ** (1.0 / p)
        s = np.log1p(s)
    x = (full - space.tau0) / space.length
    taper = np.cos(0.5 * np.pi * x) if space.free_start else np.sin(np.pi * x)
    vals = env * taper
    return vals[space.first_dof_node: space.first_dof_node + space.dof_count]


def minimize_general_p(dom, params, space, starts=DEFAULT_STARTS, gamma=2.0, seed=0,
                       max_iter=3000, gtol=1e-12):
    """Best quotient from L-BFGS runs (start 0 is the warm start, the rest random)."""
    f = _forms_for(dom, params, space, gamma)
    p = params.p
    # scale unknowns so each basis function carries unit denominator weight
    lump = np.abs(f.V.T @ (f.wy * f.rho * f.wden))
    scale = np.where(lump > 0, lump, 1.0) ** (-1.0 / p)
    M = params.m - params.level + 1
    warm = warm_start(space, p, M)
    rng = np.random.default_rng(seed)
    vals = []
    best = None

    def fun(x):
        q, g, _, _ = _quotient_and_grad(f, scale * x)
        return q, g * scale

    for k in range(max(starts, 1)):
        if k == 0:
            c0 = warm
        elif k % 2:
            c0 = warm * np.exp(0.5 * rng.standard_normal(warm.size))
        else:
            c0 = rng.random(warm.size) + 0.1
        x0 = c0 / scale
        x0 = x0 / np.max(np.abs(x0))
        res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                       options=dict(maxiter=max_iter, gtol=gtol, ftol=1e-15, maxcor=30))
        vals.append(float(res.fun))
        if best is None or res.fun < best[0]:
            best = (float(res.fun), scale * res.x, k, not res.success, str(res.message))
    return DescentResult(best[0], best[1], vals, best[2], best[3], best[4])


def smallest_quotient_degenerate(dom, k, m, space, gamma=2.0, starts=DEFAULT_STARTS):
    """Degenerate family: eigen path for ``k = 2``, descent otherwise."""
    params = HardyParams(dom.N, k, float(k), m, space.D)
    if k == 2:
        return smallest_quotient_p2(dom, params, space, gamma)
    return minimize_general_p(dom, params, space, starts, gamma).value


def discrete_quotient(dom, params, space, coeffs, gamma=2.0):
    """``(numerator, denominator)`` of the discrete function with these coefficients."""
    f = _forms_for(dom, params, space, gamma)
    _, _, num, den = _quotient_and_grad(f, np.asarray(coeffs, dtype=float))
    return f.C * num, f.C * den


@dataclass
class ConvergenceRow:
    dofs: int
    elements: int
    value: float
    seconds: float
    method: str


def convergence_table(dom, params, dofs=500, refinements=2, length=DEFAULT_LENGTH,
                      gamma=2.0, starts=DEFAULT_STARTS, seed=0):
    """Minimum quotient on ``refinements + 1`` nested spaces (element count doubling)."""
    space = DiscreteSpace.for_problem(dom, params, dofs, length)
    rows = []
    for _ in range(refinements + 1):
        t0 = time.perf_counter()
        if params.p == 2:
            val, method = smallest_quotient_p2(dom, params, space, gamma), "inverse-iteration"
        else:
            val = minimize_general_p(dom, params, space, starts, gamma, seed).value
            method = "lbfgs"
        rows.append(ConvergenceRow(space.dof_count, space.n_el, val,
                                   time.perf_counter() - t0, method))
        space = space.refine()
    return rows


def is_nonincreasing(values, rel_slack=1e-12):
    return all(b <= a * (1 + rel_slack) + rel_slack for a, b in zip(values, values[1:]))
