"""Exception types raised by the steklov package."""


class SteklovError(Exception):
    """Base class for all errors raised by this package."""


class MeshFormatError(SteklovError):
    """Raised when a mesh file cannot be parsed.

    Carries the 1-based line number of the offending line in ``line``.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateGeometryError(SteklovError):
    """Raised when a triangle has (near-)zero area or violates the
    minimum-angle floor."""


class InadmissibleMeshError(SteklovError):
    """Raised when an operation requires an admissible mesh.

    The ``report`` attribute holds the full admissibility report with the
    offending triangle indices.
    """

    def __init__(self, report):
        super().__init__(f"mesh is not admissible: {report.summary()}")
        self.report = report


class SolverFailure(SteklovError):
    """Raised when a linear or eigenvalue solve does not meet its
    accuracy contract. ``achieved`` holds the residual that was reached,
    when meaningful."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class CertificationUnavailable(SteklovError):
    """Raised when residual certification cannot produce an enclosure,
    e.g. because the Gershgorin floor of the mass-side matrix is not
    positive. Callers are expected to fall back to uncertified values
    and report that fact."""

    def __init__(self, message, floor=None):
        super().__init__(message)
        self.floor = floor
