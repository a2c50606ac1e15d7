"""Exception hierarchy.

Every error carries its class name verbatim so the CLI can print it on
stderr.  ``ValidationError`` subclasses map to exit code 2, everything
else derived from ``ComputationError`` maps to exit code 3.
"""


class SfifError(Exception):
    """Base class for all package errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class ValidationError(SfifError):
    pass


class ComputationError(SfifError):
    pass


# input validation
class NonIncreasingAbscissae(ValidationError):
    pass


class TooFewNodes(ValidationError):
    pass


class GammaOutOfRange(ValidationError):
    pass


class GammaCollision(ValidationError):
    pass


class KappaOutOfRange(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class DegreeTooHigh(ValidationError):
    pass


class CodeStringSyntax(ValidationError):
    pass


class AlphabetMismatch(ValidationError):
    pass


class DigitOutOfRange(ValidationError):
    pass


class AddressDigitOutOfRange(ValidationError):
    pass


class PointOutOfDomain(ValidationError):
    pass


class InvalidSifs(ValidationError):
    pass


# computation
class PointBudgetExceeded(ComputationError):
    pass


class InsufficientSamples(ComputationError):
    pass


class DomainMismatch(ComputationError):
    pass


class GridTooCoarse(ComputationError):
    pass


class NotApplicable(ComputationError):
    pass


class SingularDenominator(ComputationError):
    pass


class ConditionViolated(ComputationError):
    pass


class KappaUnsupported(ComputationError):
    pass


class InfeasibleOrder(ComputationError):
    pass
