"""Improved Hardy inequalities with iterated-logarithm series remainders.

Radial reductions, exact and discrete Rayleigh quotients, grid certificates
of the pointwise inequality and best-constant estimates.
"""

from .exceptions import (ConvergenceError, DegenerateDenominator, DepthError, DomainError,
                         FinitenessError, HardySeriesError, IntegrabilityError, NoAdmissibleA,
                         NotFound, ParameterError, ToleranceError)
from .functionals import HardyParams, RadialProfile, rayleigh_quotient, theorem_constant
from .geometry import BallBoundary, FlatTube, PointInBall, RadialDomain
from .special_functions import x1, xk, x_stack

__version__ = "0.1.0"

__all__ = [
    "BallBoundary", "ConvergenceError", "DegenerateDenominator", "DepthError", "DomainError",
    "FinitenessError", "FlatTube", "HardyParams", "HardySeriesError", "IntegrabilityError",
    "NoAdmissibleA", "NotFound", "ParameterError", "PointInBall", "RadialDomain",
    "RadialProfile", "ToleranceError", "rayleigh_quotient", "theorem_constant", "x1", "xk",
    "x_stack",
]
