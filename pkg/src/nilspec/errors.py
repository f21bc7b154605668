"""Exception types raised across the package."""


class NilspecError(Exception):
    """Base class for all package errors."""


class DegenerateConfigurationError(NilspecError, ValueError):
    """The translation (alpha, beta) = (0, 0) makes b -> [a, b] non-surjective."""


class DimensionMismatchError(NilspecError, ValueError):
    pass


class NodeCapExceededError(NilspecError, ValueError):
    pass


class NoClosedFormError(NilspecError, ValueError):
    """Raised by the exact engine; use corr_quadrature or corr_birkhoff instead."""


class OrbitTooShortError(NilspecError, ValueError):
    pass


class FactorConsistencyError(NilspecError, ValueError):
    def __init__(self, message, max_deviation):
        super().__init__(f"{message} (max deviation {max_deviation:.3e})")
        self.max_deviation = max_deviation


class TruncationError(NilspecError, ValueError):
    pass


class GridTooCoarseError(NilspecError, ValueError):
    pass


class UnknownScenarioError(NilspecError, KeyError):
    pass


class SpecSyntaxError(NilspecError, ValueError):
    """Malformed system / observable / config string."""
