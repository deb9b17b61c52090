"""Exception hierarchy shared across the pipeline.

Each failure class maps to a distinct CLI exit code (see cli.EXIT_CODES),
so keep the classes coarse: one per pipeline stage, not one per message.
"""


class RelcompError(Exception):
    """Base class for all errors raised by this package."""


class AnnotationError(RelcompError):
    """Malformed or inconsistent phase annotation input."""


class PlanningError(RelcompError):
    """Segment planning cannot produce a valid encode plan."""


class ProfileError(RelcompError):
    """Invalid encoding profile or profile-table lookup."""


class CatalogError(RelcompError):
    """Setup catalog construction or lookup failed."""


class QualityError(RelcompError):
    """Frame comparison rejected its inputs."""


class EncodingError(RelcompError):
    """External transcoder failure or invalid transcode request."""


class SessionError(RelcompError):
    """Rating-session protocol violation."""


class ReportError(RelcompError):
    """Report construction or serialization failed."""
