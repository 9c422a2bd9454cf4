"""Exception hierarchy shared across the package."""


class StripLabError(Exception):
    """Base class for all package errors."""


class ConstraintViolation(StripLabError):
    """A strip width or pattern parameter violates its admissible range."""


class IncompatiblePatterns(StripLabError):
    """Two patterns do not share geometry and strip count."""


class UnsupportedLaw(StripLabError):
    """Width-scale law outside the supported symbolic family."""


class MeshResolutionError(StripLabError):
    """Requested element size cannot resolve the strip set."""


class MeshFormatError(StripLabError):
    """Mesh text file is malformed."""


class AssemblyConfigError(StripLabError):
    """Mesh tags and assembly options are inconsistent (e.g. Robin facets without a coefficient)."""


class FactorizationBreakdown(StripLabError):
    """Sparse LDL^T hit a (near-)zero pivot; the shift is too close to an eigenvalue."""


class EigensolverError(StripLabError):
    """Eigenvalue computation could not satisfy its contract."""


class ConfigError(StripLabError):
    """Run configuration failed schema validation."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
