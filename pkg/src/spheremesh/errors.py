"""Exception types shared across the package."""


class SphereMeshError(Exception):
    """Base class for all errors raised by this package."""


class CloudError(SphereMeshError, ValueError):
    """Invalid point-cloud input (too few points, duplicates, non-finite)."""


class DegenerateNeighborhoodError(SphereMeshError):
    """Neighborhood is collinear or coincident; no tangent frame exists."""


class IllConditionedStencilError(SphereMeshError):
    """Weighted normal matrix of an MLS stencil is numerically singular."""


class SolveError(SphereMeshError):
    """Constrained linear solve failed (non-convergence or singularity)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MeshError(SphereMeshError):
    """Mesh construction or validation failure."""


class FileFormatError(SphereMeshError, ValueError):
    """Malformed input file; the message carries the offending line."""


class PipelineError(SphereMeshError):
    """Failure inside the parameterization pipeline, labeled with its stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
