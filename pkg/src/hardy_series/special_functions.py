"""Iterated logarithms and the correction series built from them.

The basic function is ``X_1(t) = 1 / (1 - log t)`` on ``0 < t <= 1`` and
``X_i = X_1(X_{i-1})``.  Everything here is vectorised over ``t``.

Deep inside the singular region ``t`` itself is not representable, so the
module also works from the logarithmic coordinates ``s_1 = -log t`` and
``s_{i+1} = log(1 + s_i)``, for which ``X_i = 1 / (1 + s_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DepthError, DomainError, ParameterError

MAX_DEPTH = 16
TINY_T = 1e-300


@dataclass(frozen=True)
class XSeriesParams:
    """Depth ``m`` of the correction series and the normalisation scale ``D``."""

    m: int
    D: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"series depth m must be a positive integer, got {self.m}")
        if not self.D > 0:
            raise ParameterError(f"scale D must be positive, got {self.D}")
        if self.m > MAX_DEPTH:
            raise DepthError(f"m={self.m} exceeds maximum depth {MAX_DEPTH}")


def _check_t(t, closed=True):
    t = np.asarray(t, dtype=float)
    upper_ok = t <= 1.0 if closed else t < 1.0
    if np.any(~(t > 0)) or np.any(~upper_ok):
        rng = "(0, 1]" if closed else "(0, 1)"
        raise DomainError(f"t must lie in {rng}")
    return t


def _check_depth(i):
    if int(i) != i or i < 1:
        raise ParameterError(f"depth must be a positive integer, got {i}")
    if i > MAX_DEPTH:
        raise DepthError(f"depth {i} exceeds maximum {MAX_DEPTH}")
    return int(i)


def clamp_t(t):
    """Clamp ``t`` from below at 1e-300.

    Returns the clamped array and a boolean mask flagging the entries that
    were moved, so callers can record the underflow instead of hiding it.
    """
    t = np.asarray(t, dtype=float)
    flag = t < TINY_T
    return np.where(flag, TINY_T, t), flag


def x1(t):
    """``X_1(t) = (1 - log t)^{-1}`` for ``0 < t <= 1``."""
    t = _check_t(t)
    return 1.0 / (1.0 - np.log(t))


def xk(i, t):
    """The ``i``-fold composition ``X_i(t)``."""
    i = _check_depth(i)
    x = x1(t)
    for _ in range(i - 1):
        x = 1.0 / (1.0 - np.log(x))
    return x


def x_stack(t, depth):
    """Array of shape ``(depth,) + t.shape`` holding ``X_1(t) ... X_depth(t)``."""
    depth = _check_depth(depth)
    out = [x1(t)]
    for _ in range(depth - 1):
        out.append(1.0 / (1.0 - np.log(out[-1])))
    return np.array(out)


def x_stack_from_log(y, depth, level=1):
    """``X_1 ... X_depth`` from the level-``level`` log coordinate ``y = s_level``.

    Levels shallower than ``level`` are recovered with ``s_{i-1} = expm1(s_i)``
    and may overflow to ``inf``, giving ``X = 0`` there (the honest limit).
    """
    depth = _check_depth(depth)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("log coordinate must be nonnegative")
    s = {level: y}
    with np.errstate(over="ignore"):
        for j in range(level - 1, 0, -1):
            s[j] = np.expm1(s[j + 1])
    for j in range(level + 1, depth + 1):
        s[j] = np.log1p(s[j - 1])
    return np.array([1.0 / (1.0 + s[j]) for j in range(1, depth + 1)])


def dxk_dt(i, beta, t):
    """Exact derivative of ``X_i(t)**beta``.

    ``(beta / t) * X_1 ... X_{i-1} * X_i**(1 + beta)``.
    """
    i = _check_depth(i)
    if beta == -1:
        raise ParameterError("beta = -1 is excluded")
    t = _check_t(t, closed=False)
    xs = x_stack(t, i)
    prod = np.prod(xs[:-1], axis=0) if i > 1 else np.ones_like(t)
    return beta / t * prod * xs[-1] ** (1.0 + beta)


def partial_products(xs):
    """Cumulative products ``X_1, X_1 X_2, ...`` along the first axis."""
    return np.cumprod(xs, axis=0)


def eta(params, t):
    """``eta(t) = sum_{i<=m} X_1 ... X_i``."""
    t = _check_t(t)
    return partial_products(x_stack(t, params.m)).sum(axis=0)


def bfun(params, t):
    """``B(t) = sum_{i<=m} X_1^2 ... X_i^2``."""
    return weight_terms(params, t).sum(axis=0)


def weight_terms(params, t):
    """The ``m`` weights ``X_1^2, X_1^2 X_2^2, ..., X_1^2 ... X_m^2``."""
    t = _check_t(t)
    return partial_products(x_stack(t, params.m) ** 2)


def eta_and_b_from_log(y, m, level=1):
    """``eta`` and ``B`` evaluated from a log coordinate (no underflow in ``t``)."""
    xs = x_stack_from_log(y, m, level)
    return partial_products(xs).sum(axis=0), partial_products(xs**2).sum(axis=0)


def eta_prime(params, t):
    """``eta'(t)`` assembled term by term from :func:`dxk_dt`."""
    t = _check_t(t, closed=False)
    xs = x_stack(t, params.m)
    deriv = np.array([dxk_dt(j, 1.0, t) for j in range(1, params.m + 1)])
    total = np.zeros_like(t)
    for i in range(1, params.m + 1):
        # d/dt of X_1 ... X_i by the product rule
        for j in range(i):
            others = np.prod(np.delete(xs[:i], j, axis=0), axis=0) if i > 1 else 1.0
            total = total + deriv[j] * others
    return total


def eta_identity_residual(params, t):
    """``|t eta'(t) - (B(t) + eta(t)^2) / 2|``; zero up to rounding."""
    t = _check_t(t, closed=False)
    e = eta(params, t)
    return np.abs(t * eta_prime(params, t) - 0.5 * (bfun(params, t) + e * e))
