"""
Concentration diagnostics models
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import VectorRadialField
from .potentials import FloatArray


@dataclass(frozen=True, eq=False)
class FieldFamily:
    """
    Ordered one-parameter family of fields on a common grid.

    Attributes:
        parameter_name: Name of the family parameter (e.g. "beta").
        parameters: Parameter value of each member.
        fields: Members, in the order of `parameters`.
    """

    parameter_name: str
    parameters: FloatArray
    fields: tuple[VectorRadialField, ...]

    def __post_init__(self) -> None:
        if len(self.fields) != len(self.parameters):
            raise ValueError("parameters and fields differ in length")
        if not self.fields:
            raise ValueError("a family needs at least one member")
        grid = self.fields[0].grid
        if any(not grid.compatible(u.grid) for u in self.fields[1:]):
            raise ValueError("family members live on different grids")
        steps = np.diff(np.asarray(self.parameters, dtype=np.float64))
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("family parameters must be strictly monotone")

    def __len__(self) -> int:
        return len(self.fields)


@dataclass(frozen=True)
class MassRow:
    delta: float
    f_mass: float
    dirichlet_mass: float
    l2_mass: float


@dataclass(frozen=True)
class MemberDiagnostics:
    """
    Attributes:
        parameter: Family parameter of the member.
        sup: Sup of |U|.
        mu: Concentration scale sup^(-2*/n).
        rows: Mass profile over the delta ladder.
        f_total: Total F-mass.
        dirichlet_total: Total Dirichlet energy.
        l2_tail: L2 tail ratio outside each ladder ball.
    """

    parameter: float
    sup: float
    mu: float
    rows: tuple[MassRow, ...]
    f_total: float
    dirichlet_total: float
    l2_tail: tuple[float, ...]


@dataclass(frozen=True)
class ConcentrationReport:
    """
    Reverse-Hoelder check of a concentrating family.

    Attributes:
        members: Per-member diagnostics.
        deltas: Ladder of ball radii.
        admissible_deltas: Radii large enough against the concentration
            scale to enter the extrapolation.
        nu1: Extrapolated F-mass atom.
        mu1: Extrapolated Dirichlet atom.
        margin: A0(n,F) * mu1 - nu1^(2/2*).
        concentrating: Whether the family concentrates at all.
        warnings: Report warnings.
    """

    members: tuple[MemberDiagnostics, ...]
    deltas: tuple[float, ...]
    admissible_deltas: tuple[float, ...]
    nu1: float
    mu1: float
    margin: float
    concentrating: bool
    warnings: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class DgnmResult:
    ratio: float
    lq_norm: float


@dataclass(frozen=True, eq=False)
class RescaledProfile:
    """Blow-up V(y) = mu^(n/2*) U(mu y) on a Euclidean grid."""

    mu: float
    field: VectorRadialField
