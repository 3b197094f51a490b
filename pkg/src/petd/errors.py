"""Exception types shared by all modules."""


class PetdError(Exception):
    """Base class for library errors."""


class DomainError(PetdError, ValueError):
    """Argument outside the documented working range."""


class SingularityError(DomainError):
    """Evaluation requested at a singular point of a function."""


class AccuracyError(PetdError, ArithmeticError):
    """A quadrature or iteration failed to reach its tolerance.

    Attributes
    ----------
    estimate : complex or None
        Best value obtained before giving up.
    error : float or None
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DivergenceError(AccuracyError):
    """An iteration series is growing instead of converging."""


class ConsistencyError(PetdError):
    """Two independent evaluation paths disagree beyond tolerance."""


class NumericError(PetdError, ArithmeticError):
    """Non-finite values produced inside a computation."""


class AccuracyWarning(UserWarning):
    """A result is returned but its self-reported accuracy is poor."""
