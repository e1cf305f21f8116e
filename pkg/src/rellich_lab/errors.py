"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the range where the quantity is defined."""


class TruncationError(ArithmeticError):
    """An integrand has not decayed at the ends of its grid.

    ``left`` and ``right`` carry the endpoint magnitudes relative to the
    integrand maximum.
    """

    def __init__(self, message, left=None, right=None):
        super().__init__(message)
        self.left = left
        self.right = right


class DegenerateProfileError(ArithmeticError):
    """A profile has vanishing critical norm, so the quotient is undefined."""


class SupportLossError(ValueError):
    """A grid shift would push non-negligible mass off the grid."""


class FitRejected(ArithmeticError):
    """An asymptotic fit exceeds the residual acceptance threshold."""

    def __init__(self, message, residuals=None, fit=None):
        super().__init__(message)
        self.residuals = residuals
        self.fit = fit
