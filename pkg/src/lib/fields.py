"""
Vector radial field helpers and CSV I/O

Fields are written as CSV with columns r, u_1, ..., u_k, one row per grid
node. Reading a field back requires the grid it was written from; the r
column is checked against the grid nodes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any

import numpy as np

from ..models.geometry import RadialGrid, VectorRadialField
from ..models.potentials import FloatArray, HomogeneousPotential
from .manifolds import GridMismatch, quadrature_compute
from .potentials import potential_evaluate


class FieldFormatError(ValueError):
    """Raised when a field CSV cannot be interpreted."""


def field_fromProfile(
    grid: RadialGrid, profile: Any, t0: Any
) -> VectorRadialField:
    """The rank-one field t0 * u for a scalar profile u."""
    u = np.asarray(profile, dtype=np.float64)
    direction = np.atleast_1d(np.asarray(t0, dtype=np.float64))
    if u.shape != (grid.node_count,):
        raise GridMismatch(
            f"profile has shape {u.shape}, grid has {grid.node_count} nodes"
        )
    return VectorRadialField(grid=grid, values=u[:, None] * direction[None, :])


def field_fromComponents(
    grid: RadialGrid, components: list[Any]
) -> VectorRadialField:
    """Stack k scalar profiles into a field."""
    values = np.column_stack(
        [np.asarray(c, dtype=np.float64) for c in components]
    )
    if values.shape[0] != grid.node_count:
        raise GridMismatch("component profiles do not match the grid")
    return VectorRadialField(grid=grid, values=values)


def field_constant(
    grid: RadialGrid, value: float, t0: Any
) -> VectorRadialField:
    return field_fromProfile(grid, np.full(grid.node_count, value), t0)


def fieldMass_compute(
    U: VectorRadialField, F: HomogeneousPotential | None = None
) -> float:
    """Integral of F(U), or of |U|^(2*) when F is omitted."""
    if F is None:
        density = U.norm ** U.grid.manifold.critical_exponent
    else:
        density = np.asarray(potential_evaluate(F, U.values))
    return quadrature_compute(density, U.grid)


def fieldL2_compute(U: VectorRadialField) -> float:
    """Squared L2 norm of U."""
    return quadrature_compute(np.sum(U.values * U.values, axis=1), U.grid)


def fieldSup_compute(U: VectorRadialField) -> float:
    return float(U.norm.max())


def field_writeCsv(U: VectorRadialField, path: Path) -> Path:
    """Write a field as CSV with columns r, u_1, ..., u_k."""
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["r"] + [f"u_{i + 1}" for i in range(U.k)])
        for r, row in zip(U.grid.r, U.values, strict=True):
            writer.writerow([f"{r:.17g}"] + [f"{x:.17g}" for x in row])
    return path


def field_readCsv(path: Path, grid: RadialGrid) -> VectorRadialField:
    """
    Read a field written by field_writeCsv.

    Raises:
        FieldFormatError: If the file is malformed.
        GridMismatch: If the r column does not match the grid nodes.
    """
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][0] != "r":
        raise FieldFormatError(f"{path}: missing 'r' column header")
    try:
        table: FloatArray = np.array(
            [[float(x) for x in row] for row in rows[1:]]
        )
    except ValueError as exc:
        raise FieldFormatError(f"{path}: {exc}") from exc
    if table.ndim != 2 or table.shape[1] < 2:
        raise FieldFormatError(f"{path}: field needs at least one component")
    if table.shape[0] != grid.node_count or not np.allclose(
        table[:, 0], grid.r, rtol=1e-14, atol=1e-14
    ):
        raise GridMismatch(f"{path}: radial nodes do not match the grid")
    return VectorRadialField(grid=grid, values=table[:, 1:])
