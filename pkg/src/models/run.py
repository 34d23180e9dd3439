"""
Run configuration and report payload models

A RunConfig is read from a YAML key-value file (``--config``), merged with
command-line overrides and validated here. Specs are plain descriptions;
lib.runconfig turns them into manifolds and potentials.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Literal, TypeAlias, TypedDict

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ScenarioId(str, Enum):
    """Executable example pipelines."""

    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    EXAMPLE3 = "example3"
    EXAMPLE4 = "example4"
    EXAMPLE5 = "example5"
    SPHERE_IDENTITY = "sphere-identity"
    TORUS_EXISTENCE = "torus-existence"


TaskName: TypeAlias = Literal[
    "constants", "solve", "extremal", "concentration", "scenario"
]
ReportFormat: TypeAlias = Literal["json", "csv"]


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ConformalFactorSpec(_Spec):
    """
    Conformal factor of a conformal sphere.

    `spike` is 1 + height exp(-(r/width)^2); `table` takes inline `nodes`
    and `values`; `csv` reads columns r, phi from `path` (relative to the
    input directory).
    """

    kind: Literal["spike", "table", "csv"] = "spike"
    height: float = Field(default=0.0, ge=0.0)
    width: float = Field(default=1.0, gt=0.0)
    nodes: list[float] | None = None
    values: list[float] | None = None
    path: str | None = None

    @model_validator(mode="after")
    def _payload_check(self) -> ConformalFactorSpec:
        if self.kind == "table":
            if self.nodes is None or self.values is None:
                raise ValueError("table factor needs nodes and values")
            if len(self.nodes) != len(self.values) or len(self.nodes) < 4:
                raise ValueError("table factor needs >= 4 matching samples")
        if self.kind == "csv" and not self.path:
            raise ValueError("csv factor needs a path")
        return self


class ManifoldSpec(_Spec):
    kind: Literal[
        "round-sphere", "flat-torus", "conformal-sphere", "euclidean-ball"
    ] = "round-sphere"
    n: int = Field(default=4, ge=3, le=64)
    side: float = Field(default=1.0, gt=0.0)
    radius: float = Field(default=1.0e4, gt=0.0)
    conformal_factor: ConformalFactorSpec | None = None

    @model_validator(mode="after")
    def _factor_check(self) -> ManifoldSpec:
        if self.kind == "conformal-sphere" and self.conformal_factor is None:
            raise ValueError("conformal-sphere needs a conformal_factor")
        return self


class PotentialSpec(_Spec):
    """
    Homogeneous potential.

    `kind` is a preset name (see lib.runconfig.F_PRESETS) or one of the
    serialized kinds; `params` holds the kind's parameters. `table` reads
    a direction table CSV from `path`. The degree is always 2* of the
    manifold dimension.
    """

    kind: str = "lq2"
    k: int = Field(default=1, ge=1, le=16)
    params: dict[str, Any] = Field(default_factory=dict)
    path: str | None = None


class CoefficientSpec(_Spec):
    """Radial coefficient offset + amplitude cos(frequency r)."""

    offset: float
    amplitude: float = 0.0
    frequency: float = 1.0


class SpatialPotentialSpec(_Spec):
    """
    Degree-2 spatial potential.

    `kind` is a preset name (see lib.runconfig.G_PRESETS), `quadratic-form`
    or `abs-bilinear` with a k x k `matrix` whose entries are numbers or
    coefficient specs.
    """

    kind: str = "norm"
    matrix: list[list[float | CoefficientSpec]] | None = None

    @model_validator(mode="after")
    def _matrix_check(self) -> SpatialPotentialSpec:
        if self.kind in ("quadratic-form", "abs-bilinear"):
            if not self.matrix:
                raise ValueError(f"{self.kind} needs a matrix")
            size = len(self.matrix)
            if any(len(row) != size for row in self.matrix):
                raise ValueError("G matrix must be square")
        return self


class NumericOptions(_Spec):
    grid_N: int = Field(default=2048, ge=16, le=1 << 20, multiple_of=2)
    tol: float = Field(default=1.0e-4, gt=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    el_tol: float = Field(default=1.0e-7, gt=0.0)
    max_iters: int = Field(default=400, ge=1)
    step: float = Field(default=1.0, gt=0.0)
    smoothing_eps: float = Field(default=0.0, ge=0.0)
    deltas: list[float] | None = None
    betas: list[float] | None = None
    conformal_exact: bool = False
    normalization: Literal["coefficient", "appendix"] = "coefficient"
    example5_mode: Literal["spike", "source"] = "spike"

    @model_validator(mode="after")
    def _sweep_check(self) -> NumericOptions:
        if self.deltas is not None and any(d <= 0.0 for d in self.deltas):
            raise ValueError("deltas must be positive")
        if self.betas is not None and any(b <= 1.0 for b in self.betas):
            raise ValueError("betas must exceed 1")
        return self


class RunConfig(_Spec):
    """
    One run of the laboratory.

    Attributes:
        task: Subcommand.
        scenario: Scenario id for the `scenario` task.
        manifold: Model manifold.
        F: Degree-2* potential.
        G: Degree-2 spatial potential.
        A: Gradient coefficient; A0(n, F) when omitted.
        B: Potential coefficient; required by `solve`.
        numeric: Numerical options.
        format: Report format.
    """

    task: TaskName = "constants"
    scenario: ScenarioId | None = None
    manifold: ManifoldSpec = Field(default_factory=ManifoldSpec)
    F: PotentialSpec = Field(default_factory=PotentialSpec)
    G: SpatialPotentialSpec = Field(default_factory=SpatialPotentialSpec)
    A: float | None = Field(default=None, gt=0.0)
    B: float | None = Field(default=None, ge=0.0)
    numeric: NumericOptions = Field(default_factory=NumericOptions)
    format: ReportFormat = "json"

    @model_validator(mode="after")
    def _task_check(self) -> RunConfig:
        if self.task == "scenario" and self.scenario is None:
            raise ValueError("task 'scenario' needs a scenario id")
        return self


ReportValue: TypeAlias = (
    float | int | str | bool | None | list[Any] | dict[str, Any]
)
ReportRow: TypeAlias = dict[str, ReportValue]


class ReportPayload(TypedDict):
    """
    Everything one run writes.

    Attributes:
        summary: Scalar results and nested records (JSON only).
        tables: Named row tables; each becomes one CSV file.
    """

    summary: dict[str, ReportValue]
    tables: dict[str, list[ReportRow]]
