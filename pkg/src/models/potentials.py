"""
Homogeneous potential models

A potential of degree p on R^k is stored through its restriction f to the
unit direction sphere; the full function is |t|^p f(t/|t|). F-type
potentials (degree 2*) never depend on the base point. G-type potentials
(degree 2) do, and are stored as a finite sum of radial coefficients times
x-independent degree-2 basis potentials.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any, TypeAlias

import numpy as np
from numpy.typing import NDArray

FloatArray: TypeAlias = NDArray[np.float64]

# (m, k) unit directions -> (m,) values
DirectionValues: TypeAlias = Callable[[FloatArray], FloatArray]

# (m, k) unit directions -> (m, k) ambient gradient; only the part tangent
# to the sphere is ever used
DirectionGradient: TypeAlias = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True, eq=False)
class HomogeneousPotential:
    """
    Positive homogeneous function on R^k given by its direction restriction.

    Attributes:
        k: Codomain dimension of the maps the potential acts on.
        degree: Homogeneity degree (2* for F-type, 2 for G-type).
        direction_values: Evaluator of f on unit directions.
        direction_gradient: Optional evaluator of the ambient gradient of f
            at unit directions; None when f is merely continuous.
        label: Provenance string used in reports.
        kind: Constructor name, used for serialization.
        params: Constructor parameters, used for serialization.
    """

    k: int
    degree: float
    direction_values: DirectionValues
    direction_gradient: DirectionGradient | None = None
    label: str = ""
    kind: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.degree <= 1.0:
            raise ValueError(f"degree must exceed 1, got {self.degree}")

    @property
    def differentiable(self) -> bool:
        """True when a gradient evaluator is attached."""
        return self.direction_gradient is not None


@dataclass(frozen=True)
class RadialCoefficient:
    """
    Radial coefficient c(r) = offset + amplitude * cos(frequency * r).

    Covers constants (amplitude 0) and the cosine weights used by the
    worked examples, e.g. beta(r) = 2 + cos r.
    """

    offset: float
    amplitude: float = 0.0
    frequency: float = 1.0

    @property
    def constant(self) -> bool:
        return self.amplitude == 0.0

    def values_at(self, r: FloatArray | float) -> FloatArray:
        radii = np.asarray(r, dtype=np.float64)
        if self.constant:
            return np.full(radii.shape, self.offset)
        return self.offset + self.amplitude * np.cos(self.frequency * radii)

    def scaled(self, factor: float) -> RadialCoefficient:
        return RadialCoefficient(
            offset=factor * self.offset,
            amplitude=factor * self.amplitude,
            frequency=self.frequency,
        )


@dataclass(frozen=True, eq=False)
class SpatialPotential:
    """
    Degree-2 potential G(x, t) = sum_m c_m(r(x)) * b_m(t).

    The basis potentials b_m need not be positive on their own (products
    t_i t_j appear in quadratic forms); positivity is a property of the
    assembled slices and is checked where slices are optimized.

    Attributes:
        k: Codomain dimension.
        coefficients: Radial coefficient of each basis term.
        basis: Degree-2 homogeneous basis potentials.
        label: Provenance string used in reports.
        kind: Constructor name, used for serialization.
        params: Constructor parameters, used for serialization.
    """

    k: int
    coefficients: tuple[RadialCoefficient, ...]
    basis: tuple[HomogeneousPotential, ...]
    label: str = ""
    kind: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.coefficients) != len(self.basis):
            raise ValueError("coefficients and basis differ in length")
        if not self.basis:
            raise ValueError("a spatial potential needs at least one term")
        for term in self.basis:
            if term.k != self.k:
                raise ValueError("basis term has the wrong codomain")
            if abs(term.degree - 2.0) > 1e-12:
                raise ValueError("G-type basis terms must have degree 2")

    @property
    def independent(self) -> bool:
        """True when G does not depend on the base point."""
        return all(c.constant for c in self.coefficients)

    @property
    def differentiable(self) -> bool:
        return all(term.differentiable for term in self.basis)

    def coefficient_matrix(self, r: FloatArray) -> FloatArray:
        """Coefficients at radii r, shape (terms, len(r))."""
        radii = np.atleast_1d(np.asarray(r, dtype=np.float64))
        return np.vstack([c.values_at(radii) for c in self.coefficients])

    def potential_at(self, r: float) -> HomogeneousPotential:
        """
        Freeze the base point and return the slice G(x, .) at radius r.

        Args:
            r: Radial coordinate of the base point.

        Returns:
            Degree-2 HomogeneousPotential of the slice.
        """
        weights = [float(c.values_at(r)) for c in self.coefficients]
        basis = self.basis

        def values(theta: FloatArray) -> FloatArray:
            total = np.zeros(theta.shape[0])
            for w, term in zip(weights, basis, strict=True):
                total += w * term.direction_values(theta)
            return total

        gradient: DirectionGradient | None = None
        if self.differentiable:

            def gradient(theta: FloatArray) -> FloatArray:
                total = np.zeros(theta.shape)
                for w, term in zip(weights, basis, strict=True):
                    assert term.direction_gradient is not None
                    total += w * term.direction_gradient(theta)
                return total

        return HomogeneousPotential(
            k=self.k,
            degree=2.0,
            direction_values=values,
            direction_gradient=gradient,
            label=f"{self.label}@r={r:.6g}",
            kind="slice",
        )


@dataclass(frozen=True, eq=False)
class MaximizerSet:
    """
    Maximum of F on the direction sphere and the directions attaining it.

    For a constant restriction every direction is a maximizer; the set is
    then flagged degenerate and `points` holds the whole direction lattice.

    Attributes:
        M_F: Maximum of F on the unit sphere.
        points: Unit maximizer directions, shape (m, k).
        tolerance: Relative membership band.
        degenerate: True when all directions are maximizers.
    """

    M_F: float
    points: FloatArray
    tolerance: float
    degenerate: bool = False

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def best_point(self) -> FloatArray:
        """First stored maximizer, the canonical t0 of downstream code."""
        return np.array(self.points[0], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class SmoothedPotential:
    """A C^1 approximant together with its sampled sup-distance."""

    potential: HomogeneousPotential
    epsilon: float
    deviation: float
    width: float
