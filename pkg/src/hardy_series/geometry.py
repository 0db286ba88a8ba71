"""Model geometries for the distance function ``d`` and its level sets.

Each geometry is exact: the measure of ``{d = r}`` and ``Laplacian(d)`` on it
are closed-form, so every integral over ``Omega`` reduces to a radial one,

    int_Omega F(d) dx = int_0^delta F(r) mu(r) dr.

The density is factored as ``mu(r) = c * r**(k-1) * rho(r)`` with ``rho``
bounded and equal to one near ``r = 0``; the reduced functionals only ever
see ``c`` and ``rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ParameterError

MAX_DIM = 10


def sphere_area(N):
    """Surface measure ``omega_{N-1}`` of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class RadialDomain:
    """A model pair (Omega, K).

    kind
        ``"point"``: K is the centre of a ball of radius ``delta`` (k = N).
        ``"tube"``: K is flat of codimension ``k``; ``mu(r) = C r^(k-1)``.
        ``"boundary"``: K is the boundary of the unit ball (k = 1, delta = 1).
    """

    kind: str
    N: int
    k: int
    delta: float = 1.0
    cross_measure: float = 1.0

    def __post_init__(self):
        if self.kind not in ("point", "tube", "boundary"):
            raise ParameterError(f"unknown geometry kind {self.kind!r}")
        if not 1 <= self.N <= MAX_DIM:
            raise ParameterError(f"dimension N={self.N} outside 1..{MAX_DIM}")
        if self.kind == "point" and self.k != self.N:
            raise ParameterError("point geometry has codimension N")
        if self.kind == "tube" and not 2 <= self.k <= self.N - 1:
            raise ParameterError("flat tube needs 2 <= k <= N-1")
        if self.kind == "boundary" and (self.k != 1 or self.delta != 1.0):
            raise ParameterError("ball boundary has k = 1 and delta = 1")
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        if not self.cross_measure > 0:
            raise ParameterError("cross measure must be positive")

    @property
    def codim(self):
        return self.k

    @property
    def constant(self):
        """The factor ``c`` in ``mu(r) = c r^(k-1) rho(r)``."""
        if self.kind == "tube":
            return float(self.cross_measure)
        return sphere_area(self.N)

    def rho(self, r):
        """Bounded part of the density; identically one except for the ball boundary."""
        r = np.asarray(r, dtype=float)
        if self.kind == "boundary":
            return (1.0 - r) ** (self.N - 1)
        return np.ones_like(r)

    def rho_log_derivative(self, r):
        """``d rho / dy`` with ``y = -log(r / D)``, i.e. ``-r rho'(r)``."""
        r = np.asarray(r, dtype=float)
        if self.kind == "boundary":
            if self.N == 1:
                return np.zeros_like(r)
            return (self.N - 1) * r * (1.0 - r) ** (self.N - 2)
        return np.zeros_like(r)

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(~(r > 0)) or np.any(~(r < self.delta)):
            raise DomainError(f"r must lie in (0, {self.delta})")
        return r


def PointInBall(N, delta=1.0):
    return RadialDomain("point", N, N, delta)


def FlatTube(N, k, cross_measure=1.0, delta=1.0):
    return RadialDomain("tube", N, k, delta, cross_measure)


def BallBoundary(N):
    return RadialDomain("boundary", N, 1, 1.0)


def measure_density(dom, r):
    """Measure ``mu(r)`` of the level set ``{d = r}``."""
    r = dom._check_r(r)
    return dom.constant * r ** (dom.k - 1) * dom.rho(r)


def laplacian_distance(dom, r):
    """``Laplacian(d)`` on ``{d = r}``."""
    r = dom._check_r(r)
    if dom.kind == "boundary":
        return -(dom.N - 1) / (1.0 - r)
    return (dom.k - 1) / r


def _flatness(dom, r):
    # r * Laplacian(d) + 1 - k, exact zero for point and tube
    if dom.kind == "boundary":
        return -(dom.N - 1) * r / (1.0 - r)
    return np.zeros_like(r)


def condition_C_margin(dom, p, r):
    """``(p - k)(r Laplacian(d) + 1 - k)``; the condition holds where this is <= 0."""
    if p == dom.k:
        raise ParameterError("p == k is the degenerate case; use condition_Cprime_margin")
    if not p > 1:
        raise ParameterError("p must exceed 1")
    r = dom._check_r(r)
    return (p - dom.k) * _flatness(dom, r)


def condition_Cprime_margin(dom, r):
    """``r Laplacian(d) + 1 - k``; the degenerate condition holds where this is >= 0."""
    if dom.k < 2:
        raise ParameterError("degenerate condition requires codimension k >= 2")
    r = dom._check_r(r)
    return _flatness(dom, r)


def from_cli(geometry, dim, codim=None, delta=1.0, cross_measure=1.0):
    """Build a domain from the command-line names ``point|tube|boundary``."""
    if geometry == "point":
        return PointInBall(dim, delta)
    if geometry == "tube":
        if codim is None:
            raise ParameterError("tube geometry needs --codim")
        return FlatTube(dim, codim, cross_measure, delta)
    if geometry == "boundary":
        return BallBoundary(dim)
    raise ParameterError(f"unknown geometry {geometry!r}")
