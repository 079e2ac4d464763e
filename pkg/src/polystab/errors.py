"""Exception hierarchy for polystab.

Every error raised on purpose by the package derives from :class:`PolystabError`
so callers (and the command line) can separate bad input from bugs.
"""


class PolystabError(Exception):
    """Base class for all package errors."""


class InputError(PolystabError, ValueError):
    """Malformed or unusable input data."""


class TooFewVertices(InputError):
    pass


class DuplicateVertex(InputError):
    pass


class NonFinite(InputError):
    pass


class ParseError(InputError):
    pass


class SelfIntersecting(InputError):
    """An operation that needs a simple polygon got a self-crossing one."""


# convexification refuses the same inputs as area computations
NotSimple = SelfIntersecting


class NotStarShaped(InputError):
    pass


class DegenerateHull(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class InvalidRatio(InputError):
    pass


class StepBudgetExceeded(PolystabError):
    """Convexification hit ``max_steps``; the partial trace is attached."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NoConvergence(PolystabError):
    pass


class LeftPositiveOrthant(PolystabError):
    pass


class DegenerateDenominator(PolystabError):
    pass


class VerificationError(PolystabError):
    """A numerical check failed; ``report`` holds the measured values."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IdentityViolated(VerificationError):
    pass


class InequalityViolated(VerificationError):
    pass


class NonPositive(VerificationError):
    pass


class DerivativeMismatch(VerificationError):
    pass
