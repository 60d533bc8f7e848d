"""Exception hierarchy.

Validation errors (bad inputs, violated preconditions) map to CLI exit code 2;
numerical failures map to exit code 3.
"""


class GraphbreakError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ValidationError(GraphbreakError, ValueError):
    exit_code = 2


class NumericalError(GraphbreakError, ArithmeticError):
    exit_code = 3


class NonZeroMean(ValidationError):
    pass


class WrongDimension(ValidationError):
    pass


class ResolutionTooLow(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class InfeasibleGeometry(ValidationError):
    pass


class ModeIncompatible(ValidationError):
    pass


class HypothesisFailed(ValidationError):
    pass


class NonMonotoneG(ValidationError):
    pass


class NonInvertibleG(NumericalError):
    pass


class EmptyCloud(ValidationError):
    pass


class BadConfig(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass


class ApproximationFailed(NumericalError):
    pass


class MaxIterExceeded(NumericalError):
    pass


class Overflow(NumericalError):
    """Orbit left the region |y| <= 1e8."""


class NotClosed(ValidationError):
    """Candidate graph fails the closedness (zero curl) check."""
