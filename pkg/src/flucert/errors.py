"""Exception hierarchy shared across the toolkit."""


class CertToolError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CertToolError):
    """Invalid experiment or model configuration."""


class DomainError(CertToolError, ValueError):
    """Argument outside the documented domain of an operation."""


class SizeError(ConfigError):
    """Instance size outside an exact solver's supported range."""


class ShapeError(CertToolError, ValueError):
    """Array argument has the wrong shape."""


class NumericError(CertToolError):
    """A numerical routine failed to reach its accuracy target.

    ``partial`` carries the best available estimate, when one exists.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class RankError(CertToolError):
    """Matrix is singular or rank deficient where full rank is required."""


class DegenerateRegionError(CertToolError):
    """A rejection sampler exhausted its probe budget on a too-small region."""


class InternalConsistencyError(CertToolError):
    """An identity that must hold exactly failed beyond tolerance."""


class InequalityViolationError(CertToolError):
    """A per-sample proof inequality failed; indicates an implementation bug."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}
