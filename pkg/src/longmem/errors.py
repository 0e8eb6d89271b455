"""Exception hierarchy shared by all modules."""


class LongMemError(Exception):
    """Base class for library errors."""


class ParameterError(LongMemError, ValueError):
    """A model or law parameter is outside its valid range."""


class ConfigurationError(LongMemError, ValueError):
    """A valid parameter set that cannot be run as configured."""


class NumericalError(LongMemError, ArithmeticError):
    """A numerical procedure failed (e.g. an indefinite circulant embedding)."""


class EstimationError(LongMemError, ValueError):
    """An estimator cannot be evaluated on the supplied input."""


class CoverageError(LongMemError, ValueError):
    """Not enough durations to cover the requested clock time."""

    def __init__(self, message, shortfall=None):
        super().__init__(message)
        self.shortfall = shortfall


class DegenerateInputError(EstimationError):
    """Input has no variability (constant series, zero spread)."""


class UnsupportedError(LongMemError, NotImplementedError):
    """Combination of laws for which no formula is available."""


class EmbeddingWarning(RuntimeWarning):
    """Small negative circulant eigenvalues were clipped to zero."""


class BoundaryWarning(RuntimeWarning):
    """An optimiser stopped on the edge of its search interval."""
