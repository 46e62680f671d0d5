"""Exception types shared across the package."""


class ThinFracError(Exception):
    """Base class for all package errors."""


class DomainError(ThinFracError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(ThinFracError, ValueError):
    """Incompatible combination of otherwise valid inputs."""


class UnsupportedFamilyError(ThinFracError, TypeError):
    """The operation is not defined for this test-function family."""


class NumericalFailure(ThinFracError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class SweepFailure(NumericalFailure):
    """A rung of an epsilon sweep failed; ``partial`` holds the rungs done so far."""

    def __init__(self, message, partial=None, error_estimate=None):
        super().__init__(message, error_estimate)
        self.partial = partial
