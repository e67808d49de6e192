"""Shared error types."""


class ExpZeroError(Exception):
    """Base class for all library errors."""


class DegreeCapExceeded(ExpZeroError):
    pass


class NonIsolatedRoot(ExpZeroError):
    pass


class NotRealElement(ExpZeroError):
    pass


class NotRealValued(ExpZeroError):
    pass


class DimensionMismatch(ExpZeroError):
    pass


class SizeCapExceeded(ExpZeroError):
    pass


class CapExceeded(ExpZeroError):
    pass


class FieldExtensionNeeded(ExpZeroError):
    pass


class FixedCase(ExpZeroError):
    """Every monomial is fixed by the twisted-conjugation involution."""


class G2LowerBoundFailed(ExpZeroError):
    pass


class DimensionTooHigh(ExpZeroError):
    pass


class UnboundedFunction(ExpZeroError):
    pass


class AmbiguousBranch(ExpZeroError):
    pass


class MissingBakerParams(ExpZeroError):
    pass


class RationalTerminated(ExpZeroError):
    """Continued-fraction expansion of a rational ended before the requested depth."""

    def __init__(self, quotients):
        super().__init__(f"expansion terminated after {len(quotients)} quotients")
        self.quotients = quotients


class OracleInconclusive(ExpZeroError):
    pass


class InputError(ExpZeroError):
    """Malformed instance data."""
