"""Exception types shared across the package."""


class HardySeriesError(Exception):
    """Base class for all package errors."""


class DomainError(HardySeriesError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ParameterError(HardySeriesError, ValueError):
    """Parameters violate a precondition (e.g. p == k in the main family)."""


class DepthError(ParameterError):
    """Iterated-logarithm depth beyond the configured maximum."""


class FinitenessError(HardySeriesError):
    """Requested integral is classified as divergent."""


class ToleranceError(HardySeriesError):
    """Adaptive quadrature exhausted its budget before reaching the tolerance."""


class IntegrabilityError(HardySeriesError):
    """A test profile has an infinite Rayleigh denominator."""


class DegenerateDenominator(HardySeriesError):
    """Rayleigh denominator is numerically zero."""


class NoAdmissibleA(HardySeriesError):
    """No candidate value of the free parameter ``a`` yields a certificate."""


class NotFound(HardySeriesError):
    """Search for an admissible scale D failed within the allowed range."""


class ConvergenceError(HardySeriesError):
    """An iterative solver did not converge."""
