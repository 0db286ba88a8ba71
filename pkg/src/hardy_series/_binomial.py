"""Cancellation-free remainders of the binomial series.

``remainder(x, q, order) = (1 + x)^q - sum_{n < order} C(q, n) x^n``.

Near ``x = 0`` the leading terms cancel catastrophically, so small ``x`` uses
the series itself; integer ``q`` uses the exact finite sum everywhere on
``x >= -1``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import binom

SERIES_RADIUS = 0.05
SERIES_TERMS = 16


def _is_int(q):
    return float(q).is_integer() and q >= 0


def remainder(x, q, order):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near = (x >= -1.0) if _is_int(q) else (np.abs(x) < SERIES_RADIUS)
    out[near] = remainder_ratio(x[near], q, order) * x[near] ** order
    out[~near] = _direct(x[~near], q, order)
    return out


def remainder_ratio(x, q, order):
    """``remainder(x, q, order) / x**order``, finite at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    if _is_int(q):
        qi = int(q)
        near = x >= -1.0
        top = qi
    else:
        near = np.abs(x) < SERIES_RADIUS
        top = order + SERIES_TERMS
    xs = x[near]
    acc = np.zeros_like(xs)
    for n in range(top, order - 1, -1):
        acc = acc * xs + binom(q, n)
    out[near] = acc
    far = ~near
    out[far] = _direct(x[far], q, order) / x[far] ** order
    return out


def _direct(x, q, order):
    val = np.abs(1.0 + x) ** q
    for n in range(order):
        val = val - binom(q, n) * x**n
    return val


def signed_power_remainder(x, q):
    """``sign(1+x)|1+x|^q - 1`` computed without cancellation near ``x = 0``."""
    x = np.asarray(x, dtype=float)
    out = remainder(x, q, 1)
    neg = x < -1.0
    out[neg] = -np.abs(1.0 + x[neg]) ** q - 1.0
    return out
