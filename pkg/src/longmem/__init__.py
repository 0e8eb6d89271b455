"""Simulation and estimation tools for nonlinear long-memory time series."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigurationError,
    CoverageError,
    DegenerateInputError,
    EstimationError,
    LongMemError,
    NumericalError,
    ParameterError,
    UnsupportedError,
)
from .rand import RngStream, StableParams  # noqa: F401
