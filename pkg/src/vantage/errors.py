"""Exception hierarchy shared across the package.

ValidationError subclasses map to CLI exit code 1; everything else
(I/O, resource limits, degenerate pipelines) maps to exit code 2.
"""


class VantageError(Exception):
    """Base class for all package errors."""


class ValidationError(VantageError):
    """Input document or spec violates an invariant."""


class ParseError(ValidationError):
    """Document is not well formed; message carries field/line context."""


class ResourceLimitError(VantageError):
    """A configurable resource cap (e.g. voxel count) would be exceeded."""


class DegenerateSceneError(VantageError):
    """Pipeline cannot proceed because the scene carries no usable signal
    (no weighted voxels, no visible waypoints, empty baseline visibility)."""
