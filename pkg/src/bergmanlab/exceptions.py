"""Exception hierarchy for bergmanlab."""


class BergmanLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BergmanLabError, ValueError):
    """A point lies outside the chart domain of a model."""


class PositivityError(BergmanLabError, ValueError):
    """The curvature density is not strictly positive."""


class DegenerateMetricError(BergmanLabError, ValueError):
    """A background metric has a non-positive volume density."""


class UnsupportedModelError(BergmanLabError, TypeError):
    """The operation is not available for this model."""


class QuadratureOrderError(BergmanLabError):
    """The quadrature rule is too coarse for the requested level."""


class CholeskyBreakdownError(BergmanLabError, ValueError):
    """Cholesky factorization failed at a leading minor.

    ``minor`` is the 1-based index of the first non-positive leading minor,
    as reported by LAPACK.
    """

    def __init__(self, minor, message=None):
        self.minor = int(minor)
        super().__init__(message or f"leading minor of order {self.minor} is not positive definite")


class BasePointError(BergmanLabError, ValueError):
    """All sections vanish at the evaluation point."""


class IllConditionedFitError(BergmanLabError, ValueError):
    """The design matrix of an expansion fit is numerically singular."""


class PoleError(BergmanLabError, ZeroDivisionError):
    """Evaluation at the pole of a model kernel."""


class ConfigError(BergmanLabError, ValueError):
    """Malformed experiment configuration."""


class FourierMismatchWarning(UserWarning):
    """Quadrature and closed-form Fourier coefficients disagree."""
