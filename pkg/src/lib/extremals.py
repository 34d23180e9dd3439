"""
Closed-form extremal families and equality residuals

Two families are built in closed form:

    bubble            a t0 (1 + (b r)^2)^(-(n-2)/2)            Euclidean
    sphere extremal   (beta^2-1)^((n-2)/4) omega_n^(-1/2*)
                      (beta - cos r)^(1-n/2) t0                 round sphere

The equality residual of an inequality LHS <= RHS is (RHS - LHS) / |RHS|:
nonnegative for valid constants and zero on extremals, up to the
quadrature error of the grid.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ..config import appsettings
from ..models.concentration import FieldFamily
from ..models.extremals import (
    BubbleParams,
    ExtremalSweepRow,
    Factorization,
    Inequality,
    SphereExtremalParams,
)
from ..models.geometry import (
    ManifoldKind,
    ModelManifold,
    RadialGrid,
    VectorRadialField,
)
from ..models.potentials import (
    FloatArray,
    HomogeneousPotential,
    MaximizerSet,
    SpatialPotential,
)
from .constants import a0Euclidean_compute, a0Vector_compute
from .fields import field_fromProfile, fieldL2_compute, fieldMass_compute
from .log import LOG
from .manifolds import (
    GridMismatch,
    gradientDirichlet_compute,
    quadrature_compute,
    radialGrid_make,
    unitSphere_volume,
)
from .potentials import (
    directionSphere_maximize,
    potential_evaluate,
    spatialPotential_evaluate,
)


class BetaOutOfRange(ValueError):
    """Raised for sphere extremals with beta <= 1."""


class MissingConstant(ValueError):
    """Raised when an inequality is checked without one of its constants."""


class ZeroField(ValueError):
    """Raised when a field vanishes identically."""


def _gridDimension(grid: RadialGrid, n: int) -> None:
    if grid.n != n:
        raise GridMismatch(f"profile of dimension {n} on a grid of {grid.n}")


def bubbleProfile_build(
    p: BubbleParams, grid: RadialGrid
) -> VectorRadialField:
    """
    Bubble a (1 + (b r)^2)^(-(n-2)/2) along t0, radial about the pole.

    Intended for Euclidean grids; on other grids r is the geodesic
    distance to the pole.
    """
    _gridDimension(grid, p.n)
    profile = p.a * (1.0 + (p.b * grid.distance) ** 2) ** (-(p.n - 2) / 2.0)
    return field_fromProfile(grid, profile, p.t0)


def sphereExtremalProfile_values(
    n: int, beta: float, r: Any
) -> FloatArray:
    """Scalar sphere extremal at distances r."""
    if beta <= 1.0:
        raise BetaOutOfRange(f"beta must exceed 1, got {beta}")
    two_star = 2.0 * n / (n - 2)
    amplitude = (beta * beta - 1.0) ** ((n - 2) / 4.0) * unitSphere_volume(
        n
    ) ** (-1.0 / two_star)
    return amplitude * (beta - np.cos(np.asarray(r))) ** (1.0 - n / 2.0)


def sphereExtremalProfile_build(
    p: SphereExtremalParams, grid: RadialGrid
) -> VectorRadialField:
    """
    Round-sphere extremal of concentration beta along t0.

    Raises:
        BetaOutOfRange: If beta <= 1.
        GridMismatch: If the grid is not a round-sphere grid of dimension n.
    """
    if grid.manifold.kind is not ManifoldKind.ROUND_SPHERE:
        raise GridMismatch("sphere extremals need a round-sphere grid")
    _gridDimension(grid, p.n)
    return field_fromProfile(
        grid, sphereExtremalProfile_values(p.n, p.beta, grid.r), p.t0
    )


def betaSweep_default(points: int | None = None) -> FloatArray:
    """Concentration parameters 1 + logspace(-3, 1), decreasing in beta."""
    count = appsettings.beta_sweep_points if points is None else points
    return (1.0 + np.logspace(-3.0, 1.0, count))[::-1]


def sphereExtremalFamily_make(
    n: int,
    betas: Any = None,
    grid: RadialGrid | None = None,
    t0: Any = None,
) -> FieldFamily:
    """
    Family of sphere extremals, ordered from flat to concentrated.

    Args:
        n: Dimension.
        betas: Concentration parameters; the default sweep when omitted.
        grid: Round-sphere grid; built with default resolution if omitted.
        t0: Unit direction; the first basis vector of R^1 by default.
    """
    values = betaSweep_default() if betas is None else np.asarray(betas)
    mesh = (
        grid
        if grid is not None
        else radialGrid_make(ModelManifold(ManifoldKind.ROUND_SPHERE, n))
    )
    direction = np.ones(1) if t0 is None else np.asarray(t0, dtype=np.float64)
    members = tuple(
        sphereExtremalProfile_build(
            SphereExtremalParams(n=n, beta=float(beta), t0=direction), mesh
        )
        for beta in values
    )
    return FieldFamily(
        parameter_name="beta",
        parameters=np.asarray(values, dtype=np.float64),
        fields=members,
    )


def equalityResidual_compute(
    U: VectorRadialField,
    inequality: Inequality | str,
    A: float | None = None,
    B: float | None = None,
    F: HomogeneousPotential | None = None,
    G: SpatialPotential | None = None,
) -> float:
    """
    Relative slack (RHS - LHS) / |RHS| of a sharp inequality at U.

    The inequalities are, with 2* = 2n/(n-2):

        E.1      (int |U|^(2*))^(2/2*) <= A int |grad U|^2
        Euc      (int F(U))^(2/2*)     <= A int |grad U|^2
        B-opt    (int |U|^(2*))^(2/2*) <= A int |grad U|^2 + B int |U|^2
        B-opt-v  (int F(U))^(2/2*)     <= A int |grad U|^2 + B int G(x,U)

    A defaults to A0(n) for the scalar forms and A0(n, F) for the vector
    forms. B has no default.

    Raises:
        MissingConstant: If B, F or G is needed and not supplied.
        ZeroField: If both sides vanish.
    """
    kind = Inequality(inequality)
    grid = U.grid
    n = grid.n
    two_star = grid.manifold.critical_exponent
    vector = kind in (Inequality.EUCLIDEAN_VECTOR, Inequality.VECTOR_OPTIMAL)
    if vector and F is None:
        raise MissingConstant(f"{kind.value} needs the potential F")
    if kind in (Inequality.SCALAR_OPTIMAL, Inequality.VECTOR_OPTIMAL):
        if B is None:
            raise MissingConstant(f"{kind.value} needs the constant B")
    if kind is Inequality.VECTOR_OPTIMAL and G is None:
        raise MissingConstant("B-opt-v needs the potential G")

    if vector:
        assert F is not None
        lhs = fieldMass_compute(U, F) ** (2.0 / two_star)
        leading = a0Vector_compute(n, F) if A is None else A
    else:
        lhs = fieldMass_compute(U) ** (2.0 / two_star)
        leading = a0Euclidean_compute(n) if A is None else A
    rhs = leading * gradientDirichlet_compute(U)
    if kind is Inequality.SCALAR_OPTIMAL:
        assert B is not None
        rhs += B * fieldL2_compute(U)
    elif kind is Inequality.VECTOR_OPTIMAL:
        assert B is not None and G is not None
        rhs += B * quadrature_compute(
            spatialPotential_evaluate(G, grid.r, U.values), grid
        )
    if rhs == 0.0:
        if lhs == 0.0:
            raise ZeroField("both sides of the inequality vanish")
        return float("-inf")
    residual = (rhs - lhs) / abs(rhs)
    LOG(f"{kind.value} residual: {residual:.3e}", 3)
    return float(residual)


def extremal_factorize(
    U: VectorRadialField,
    F: HomogeneousPotential | None = None,
    X_F: MaximizerSet | None = None,
) -> Factorization:
    """
    Split U into a direction t0 and a scalar profile u = <U, t0>.

    t0 is the normalized mean of U |U|^(2*-2); when that mean cancels, the
    leading eigenvector of the L2 Gram matrix is used instead.

    Raises:
        ZeroField: If U vanishes identically.
    """
    grid = U.grid
    norm = U.norm
    if not np.any(norm > 0.0):
        raise ZeroField("cannot factorize the zero field")
    two_star = grid.manifold.critical_exponent
    scaled = U.values * (norm ** (two_star - 2.0))[:, None]
    weighted = grid.quadrature @ scaled
    length = float(np.linalg.norm(weighted))
    if length > 1e-14 * float(norm.max()) ** (two_star - 1.0):
        t0 = weighted / length
    else:
        gram = U.values.T @ (grid.quadrature[:, None] * U.values)
        _, vectors = np.linalg.eigh(gram)
        t0 = vectors[:, -1]
    profile = U.values @ t0
    rest = U.values - profile[:, None] * t0[None, :]
    total = fieldL2_compute(U)
    if total > 0.0:
        residual = quadrature_compute(np.sum(rest * rest, axis=1), grid)
        deviation = float(np.sqrt(residual / total))
    else:
        deviation = float(np.max(np.abs(rest)) / norm.max())

    maximizing: bool | None = None
    if F is not None:
        maxima = X_F if X_F is not None else directionSphere_maximize(F)
        value = float(potential_evaluate(F, t0))
        maximizing = value >= maxima.M_F * (1.0 - maxima.tolerance)
    return Factorization(
        t0=t0, profile=profile, deviation=deviation, maximizing=maximizing
    )


def extremalSweep_tabulate(
    n: int,
    betas: Any = None,
    grid: RadialGrid | None = None,
) -> list[ExtremalSweepRow]:
    """
    One row per beta: pole amplitude, L^(2*) mass and B-opt residual with
    A0(n) and B0 = omega_n^(-2/n).
    """
    family = sphereExtremalFamily_make(n, betas, grid)
    mesh = family.fields[0].grid
    b0 = float(mesh.quadrature.sum() ** (-2.0 / n))
    rows: list[ExtremalSweepRow] = []
    for beta, member in zip(family.parameters, family.fields, strict=True):
        rows.append(
            ExtremalSweepRow(
                beta=float(beta),
                pole_value=float(member.values[0, 0]),
                f_mass=fieldMass_compute(member),
                residual=equalityResidual_compute(
                    member, Inequality.SCALAR_OPTIMAL, B=b0
                ),
            )
        )
    LOG(f"extremal sweep: {len(rows)} members for n={n}", 2)
    return rows
