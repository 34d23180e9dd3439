"""
Model manifolds, radial grids and vector-valued fields

Every computation is carried out on radially symmetric data: profiles of
the geodesic distance to a distinguished pole. A RadialGrid bundles the
radial nodes with the lumped quadrature weights and the cell conductances
of the discrete Dirichlet form, so that integrals, energies and the
Laplacian are all assembled from the same discretization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np

from .potentials import FloatArray


class ManifoldKind(str, Enum):
    """Supported model geometries."""

    ROUND_SPHERE = "round-sphere"
    FLAT_TORUS = "flat-torus"
    CONFORMAL_SPHERE = "conformal-sphere"
    EUCLIDEAN_BALL = "euclidean-ball"


@dataclass(frozen=True, eq=False)
class ConformalFactor:
    """
    Positive radial factor phi with g = phi^(4/(n-2)) h on the round sphere.

    Attributes:
        kind: "spike" for 1 + height * exp(-(r/width)^2), "table" for values
            tabulated at `nodes` and interpolated with a clamped spline.
        height: Spike height.
        width: Spike width.
        nodes: Radii of tabulated values (table kind only).
        values: Tabulated factor values (table kind only).
        label: Provenance string used in reports.
    """

    kind: Literal["spike", "table"]
    height: float = 0.0
    width: float = 1.0
    nodes: FloatArray | None = None
    values: FloatArray | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind == "spike" and self.width <= 0.0:
            raise ValueError("spike width must be positive")
        if self.kind == "table":
            if self.nodes is None or self.values is None:
                raise ValueError("table factor needs nodes and values")
            if self.nodes.shape != self.values.shape:
                raise ValueError("table nodes and values differ in shape")


@dataclass(frozen=True, eq=False)
class ModelManifold:
    """
    Closed (or truncated Euclidean) model geometry of dimension n.

    Attributes:
        kind: Geometry family.
        n: Dimension, at least 3.
        side: Side length of the flat torus.
        radius: Outer radius of the Euclidean model.
        conformal_factor: Factor of the conformal sphere.
        label: Provenance string used in reports.
    """

    kind: ManifoldKind
    n: int
    side: float = 1.0
    radius: float = 1.0e4
    conformal_factor: ConformalFactor | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"dimension must be >= 3, got {self.n}")
        if self.kind is ManifoldKind.FLAT_TORUS and self.side <= 0.0:
            raise ValueError("torus side must be positive")
        if self.kind is ManifoldKind.EUCLIDEAN_BALL and self.radius <= 0.0:
            raise ValueError("Euclidean radius must be positive")
        if (
            self.kind is ManifoldKind.CONFORMAL_SPHERE
            and self.conformal_factor is None
        ):
            raise ValueError("conformal sphere needs a conformal factor")

    @property
    def critical_exponent(self) -> float:
        """Sobolev critical exponent 2* = 2n/(n-2)."""
        return 2.0 * self.n / (self.n - 2)

    @property
    def closed(self) -> bool:
        return self.kind is not ManifoldKind.EUCLIDEAN_BALL

    @property
    def r_max(self) -> float:
        """Largest geodesic distance from the pole."""
        if self.kind is ManifoldKind.FLAT_TORUS:
            return 0.5 * self.side
        if self.kind is ManifoldKind.EUCLIDEAN_BALL:
            return self.radius
        return float(np.pi)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """
    Discretization of a model manifold along the distance to the pole.

    Nodes are images r = map(s) of a uniform parameter grid s. Cells join
    consecutive nodes (cyclically on the torus). The discrete operators use
    the lumped trapezoid masses, so that the Laplacian built from the cell
    conductances is self-adjoint for the inner product they define.
    Reported integrals use composite Simpson weights on the same nodes; on
    the torus both coincide.

    Attributes:
        manifold: Geometry being discretized.
        intervals: Number of parameter intervals N.
        s: Uniform parameter nodes.
        r: Radial coordinate of each node.
        distance: Geodesic distance of each node to the pole.
        weights: Lumped mass of each node (volume density included).
        quadrature: Composite Simpson weight of each node.
        cell_left: Left node index of each cell.
        cell_right: Right node index of each cell.
        conductance: Dirichlet-form conductance of each cell.
        pole_nodes: Nodes where the Laplacian uses its pole limit.
        pole_neighbours: Neighbour node of each pole node.
        pole_ratio: Metric ratio phi^(2-2*) of each pole node.
        periodic: True on the torus.
    """

    manifold: ModelManifold
    intervals: int
    s: FloatArray
    r: FloatArray
    distance: FloatArray
    weights: FloatArray
    quadrature: FloatArray
    cell_left: np.ndarray
    cell_right: np.ndarray
    conductance: FloatArray
    pole_nodes: tuple[int, ...]
    pole_neighbours: tuple[int, ...]
    pole_ratio: tuple[float, ...]
    periodic: bool = False

    @property
    def node_count(self) -> int:
        return int(self.r.shape[0])

    @property
    def n(self) -> int:
        return self.manifold.n

    @property
    def r_max(self) -> float:
        return self.manifold.r_max

    def compatible(self, other: RadialGrid) -> bool:
        """True when both grids carry the same nodes and weights."""
        if self is other:
            return True
        return (
            self.node_count == other.node_count
            and self.manifold.kind is other.manifold.kind
            and self.manifold.n == other.manifold.n
            and bool(np.array_equal(self.r, other.r))
            and bool(np.array_equal(self.weights, other.weights))
        )


@dataclass(frozen=True, eq=False)
class VectorRadialField:
    """
    Radial map U: M -> R^k sampled on a RadialGrid.

    Attributes:
        grid: Grid the field lives on.
        values: Node values, shape (nodes, k).
        center: Tag of the pole the field is radial around.
    """

    grid: RadialGrid
    values: FloatArray
    center: str = "p0"

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("field values must have shape (nodes, k)")
        if self.values.shape[0] != self.grid.node_count:
            raise ValueError(
                f"field has {self.values.shape[0]} nodes, grid has "
                f"{self.grid.node_count}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def k(self) -> int:
        return int(self.values.shape[1])

    @property
    def components(self) -> FloatArray:
        """Component profiles, shape (k, nodes)."""
        return self.values.T

    @property
    def norm(self) -> FloatArray:
        """Pointwise Euclidean norm |U|."""
        return np.linalg.norm(self.values, axis=1)

    def with_values(self, values: FloatArray) -> VectorRadialField:
        return VectorRadialField(
            grid=self.grid, values=values, center=self.center
        )


class MassIntegrand(str, Enum):
    """Density integrated over geodesic balls."""

    F_MASS = "F-mass"
    DIRICHLET = "Dirichlet"
    L2 = "L2"
