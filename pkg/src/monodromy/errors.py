"""Exception types shared across the package."""


class MonodromyError(Exception):
    """Base class for all errors raised by this package."""


class NonSplitSpectrum(MonodromyError):
    """A matrix has an eigenvalue outside the prime field."""


class NotAnIsometry(MonodromyError):
    """A matrix does not preserve the bilinear form it was checked against."""


class InternalFactorizationFailure(MonodromyError):
    """The reflection factorization did not terminate within its iteration cap."""


class PrecedenceViolation(MonodromyError):
    """An operation was called without its required precondition flag."""


class ResourceLimit(MonodromyError):
    """Orbit storage exceeded the configured cap."""


class OrderOverflow(MonodromyError):
    """Element order exceeded the configured cap."""


class Inconclusive(MonodromyError):
    """A randomized search exhausted its trials without a definite answer."""

    def __init__(self, message, trials=0):
        super().__init__(message)
        self.trials = trials


class NotInCategory(MonodromyError):
    """The tuple does not satisfy the membership condition for convolution."""


class DegenerateQuotient(MonodromyError):
    """The convolution quotient has the wrong dimension (orientation bug guard)."""


class BadLocus(MonodromyError):
    """Puncture labels collide with a reserved locus or repeat."""


class NegativeDimension(MonodromyError):
    """A dimension formula was evaluated outside its valid regime."""
