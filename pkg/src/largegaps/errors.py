"""Exception hierarchy shared by the library and the command line.

Validation problems map to exit code 1, numerical failures to exit code 2.
"""


class LargeGapsError(Exception):
    """Base class for all package errors."""


class ValidationError(LargeGapsError, ValueError):
    """Inputs violate a documented precondition."""


class NumericalError(LargeGapsError, ArithmeticError):
    """A computation could not be completed to the required accuracy."""


class OrderOverflowError(ValidationError):
    """Hermite order above the configured maximum."""


class QuadratureOrderError(NumericalError):
    """Doubling the quadrature order changed a result beyond tolerance."""


class FitUnstableError(NumericalError):
    """The constant fit disagrees across opening angles."""

    def __init__(self, message, c0_hat=None, spread=None):
        super().__init__(message)
        self.c0_hat = c0_hat
        self.spread = spread


class RejectionStallError(NumericalError):
    """Rejection sampling exceeded its proposal budget for a single point."""


class HypothesisViolationError(ValidationError):
    """Lemma hypotheses do not hold for the supplied configuration."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)
