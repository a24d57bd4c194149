class DomainError(ValueError):
    """Argument outside the domain of a function."""


class SeriesTruncationError(RuntimeError):
    """The demand series needs more terms than the hard cap allows."""


class ConditioningError(ArithmeticError):
    """A closed-form value left its admissible range beyond round-off."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, interval=None, error=None):
        super().__init__(message)
        self.interval = interval
        self.error = error
