"""Exception types shared across the package."""


class EffActionError(Exception):
    """Base class for all errors raised by effaction."""


class ExpressionError(EffActionError, ValueError):
    """Malformed model expression."""

    def __init__(self, message, column=None):
        self.column = column
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(message)


class ExprSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


class EvaluationError(EffActionError, ArithmeticError):
    """An expression produced a non-finite value (division by zero, log/sqrt of a bad argument)."""


class DomainError(EffActionError, ValueError):
    """A coordinate lies outside the configured domain interval."""


class NonPositiveMassError(EffActionError, ValueError):
    pass


class NonPositiveFrequencyError(EffActionError, ValueError):
    """Omega^2 <= 0 where a real, positive frequency is required."""

    def __init__(self, message, x=None):
        self.x = x
        super().__init__(message)


class NotPositiveDefiniteError(EffActionError, ValueError):
    """Lattice fluctuation operator has a non-positive pivot."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class NonMonotoneMapError(EffActionError, ValueError):
    pass


class DomainExitError(EffActionError):
    """An orbit left the configuration domain during integration.

    ``trajectory`` holds the states computed up to (excluding) the exit.
    """

    def __init__(self, message, tau, trajectory=None):
        self.tau = tau
        self.trajectory = trajectory
        super().__init__(message)


class ConfigError(EffActionError, ValueError):
    """Run-configuration problem; ``field`` is a ``section.key`` path."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ConsistencyError(EffActionError, AssertionError):
    """Two independent formulas for the same quantity disagree."""
