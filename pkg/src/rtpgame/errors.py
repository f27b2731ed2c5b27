"""Exception hierarchy shared by every module."""


class RTPGameError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(RTPGameError, ValueError):
    """A model parameter is outside its admissible range."""


class InvalidPriorError(InvalidParameterError):
    """The preference prior is not a valid Gaussian (bad covariance)."""


class DegenerateParameterError(InvalidParameterError):
    """Parameters hit a singular point of a closed-form expression."""


class ConfigurationError(RTPGameError, ValueError):
    """Scenario or run configuration is inconsistent."""


class SolverError(RTPGameError, RuntimeError):
    """The equilibrium linear system could not be solved."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class NumericalError(RTPGameError, RuntimeError):
    """A numerical invariant (e.g. covariance PSD) was violated."""
