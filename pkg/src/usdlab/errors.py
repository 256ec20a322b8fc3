"""Exception types shared across the package."""


class UsdlabError(Exception):
    """Base class for package-specific errors."""


class CapExceededError(UsdlabError):
    """A configured size cap would be exceeded.

    Carries the predicted size so callers can report it without recomputing.
    """

    def __init__(self, message, predicted=None, cap=None):
        super().__init__(message)
        self.predicted = predicted
        self.cap = cap


class DimensionMismatchError(UsdlabError):
    """Operands live on tori of different dimension."""


class GridTooCoarseError(UsdlabError):
    """A quadrature or evaluation grid cannot be made fine enough within caps.

    Raised instead of silently under-resolving the integrand.
    """


class RankDeficiencyError(UsdlabError):
    """A subspace basis is numerically rank deficient."""


class NormBudgetError(UsdlabError):
    """An input violates a required norm bound."""


class ZeroResidualError(UsdlabError):
    """The norming functional of a zero residual is undefined."""


class ProfileTooShortError(UsdlabError):
    """An entropy profile does not cover the requested index range."""


class ConfigError(UsdlabError):
    """An experiment configuration failed validation."""

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path
