"""
Models package for sobolevlab

Contains the data structures threaded through the numerical core and the
run pipeline.
"""

from .constants import (
    BestConstantReport,
    BoundEntry,
    BoundProvenance,
    DichotomyVerdict,
    ReferenceModel,
    Verdict,
)
from .geometry import (
    ConformalFactor,
    ManifoldKind,
    ModelManifold,
    RadialGrid,
    VectorRadialField,
)
from .potentials import (
    HomogeneousPotential,
    MaximizerSet,
    RadialCoefficient,
    SpatialPotential,
)
from .run import ReportPayload, RunConfig, ScenarioId
from .solver import SolverConfig, SolverResult, VariationalProblem
from .state import ProgramState, pipeline

__all__ = [
    "ProgramState",
    "pipeline",
    "BestConstantReport",
    "BoundEntry",
    "BoundProvenance",
    "DichotomyVerdict",
    "ReferenceModel",
    "Verdict",
    "ConformalFactor",
    "ManifoldKind",
    "ModelManifold",
    "RadialGrid",
    "VectorRadialField",
    "HomogeneousPotential",
    "MaximizerSet",
    "RadialCoefficient",
    "SpatialPotential",
    "ReportPayload",
    "RunConfig",
    "ScenarioId",
    "SolverConfig",
    "SolverResult",
    "VariationalProblem",
]
