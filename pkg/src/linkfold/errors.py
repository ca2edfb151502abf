"""Exception hierarchy shared by all workbench modules."""


class LinkfoldError(Exception):
    """Base class for all workbench errors."""


class ValidationError(LinkfoldError):
    """Structurally malformed input (bad graph, bad file, bad argument)."""


class AssemblyError(LinkfoldError):
    """A kinematic loop has no real solution for the requested drivers."""

    def __init__(self, message, loop=None):
        super().__init__(message)
        self.loop = loop


class ConvergenceError(LinkfoldError):
    """Position solver failed to reach tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularityError(LinkfoldError):
    """Dead-point configuration: the constraint Jacobian lost rank."""

    def __init__(self, message, joint_id=None):
        super().__init__(message)
        self.joint_id = joint_id


class GeometryError(LinkfoldError):
    """Degenerate geometry (coincident pivots, parallel pads, ...)."""


class DomainError(LinkfoldError):
    """Input value outside the documented domain of an operation."""


class VisibilityError(LinkfoldError):
    """Requested pad is not visible from the camera."""


class FeatureExtractionError(LinkfoldError):
    """Image pipeline could not produce a stable quadrilateral feature."""


class ConditioningError(LinkfoldError):
    """Numerically degenerate fit (near-collinear homography points, ...)."""


class SchemaError(ValidationError):
    """File failed schema validation; carries the offending field path."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class VersionError(SchemaError):
    """File format version not supported."""
