"""
Potential serialization

JSON form of a potential: {kind, k, degree, params}. Constructor kinds
round-trip through their parameters; anything else (smoothed restrictions,
slices, custom callables) is written as a sampled direction table on the
configured lattice and reads back as a nearest-lookup table potential.

Direction tables are CSV files with columns theta_1..theta_k, f.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any

import numpy as np

from ..models.potentials import (
    FloatArray,
    HomogeneousPotential,
    RadialCoefficient,
    SpatialPotential,
)
from .directions import directionLattice_make
from .potentials import (
    coordinatePowerPotential_make,
    lqPotential_make,
    potential_compose,
    potential_scale,
    productPotential_make,
    quadraticFormPotential_make,
    tablePotential_make,
)


class PotentialFormatError(ValueError):
    """Raised when a serialized potential cannot be interpreted."""


def potential_toDict(P: HomogeneousPotential) -> dict[str, Any]:
    """Serialize a potential to its JSON-compatible dictionary."""
    head: dict[str, Any] = {"kind": P.kind, "k": P.k, "degree": P.degree}
    params = dict(P.params)
    if P.kind in ("lq", "coordinate-power", "quadratic-form", "product"):
        head["params"] = params
        return head
    if P.kind in ("scaled", "composed"):
        base = params.pop("base")
        head["params"] = {**params, "base": potential_toDict(base)}
        return head
    if P.kind == "table":
        head["table"] = [
            [*theta, value]
            for theta, value in zip(
                params["directions"], params["values"], strict=True
            )
        ]
        return head
    lattice = directionLattice_make(P.k)
    values = P.direction_values(lattice)
    head["kind"] = "table"
    head["table"] = np.column_stack([lattice, values]).tolist()
    return head


def potential_fromDict(data: dict[str, Any]) -> HomogeneousPotential:
    """
    Rebuild a potential from its dictionary form.

    Raises:
        PotentialFormatError: On an unknown kind or missing parameters.
    """
    try:
        kind = data["kind"]
        k = int(data["k"])
        degree = float(data["degree"])
        params = data.get("params", {})
        if kind == "lq":
            return lqPotential_make(float(params["q"]), degree, k)
        if kind == "coordinate-power":
            return coordinatePowerPotential_make(
                params["coefficients"], degree
            )
        if kind == "quadratic-form":
            return quadraticFormPotential_make(params["matrix"])
        if kind == "product":
            return productPotential_make(
                int(params["i"]), int(params["j"]), k, bool(params["absolute"])
            )
        if kind == "scaled":
            return potential_scale(
                float(params["factor"]), potential_fromDict(params["base"])
            )
        if kind == "composed":
            return potential_compose(
                potential_fromDict(params["base"]), params["matrix"]
            )
        if kind == "table":
            table = np.asarray(data["table"], dtype=np.float64)
            return tablePotential_make(table[:, :k], table[:, k], degree)
    except (KeyError, TypeError, IndexError) as exc:
        raise PotentialFormatError(f"malformed potential: {exc}") from exc
    raise PotentialFormatError(f"unknown potential kind '{kind}'")


def radialCoefficient_toDict(c: RadialCoefficient) -> dict[str, float]:
    return {
        "offset": c.offset,
        "amplitude": c.amplitude,
        "frequency": c.frequency,
    }


def spatialPotential_toDict(G: SpatialPotential) -> dict[str, Any]:
    return {
        "kind": "spatial",
        "k": G.k,
        "label": G.label,
        "terms": [
            {
                "coefficient": radialCoefficient_toDict(c),
                "basis": potential_toDict(term),
            }
            for c, term in zip(G.coefficients, G.basis, strict=True)
        ],
    }


def spatialPotential_fromDict(data: dict[str, Any]) -> SpatialPotential:
    try:
        terms = data["terms"]
        coefficients = tuple(
            RadialCoefficient(**term["coefficient"]) for term in terms
        )
        basis = tuple(potential_fromDict(term["basis"]) for term in terms)
        return SpatialPotential(
            k=int(data["k"]),
            coefficients=coefficients,
            basis=basis,
            label=str(data.get("label", "")),
            kind="spatial",
        )
    except (KeyError, TypeError) as exc:
        raise PotentialFormatError(
            f"malformed spatial potential: {exc}"
        ) from exc


def directionTable_write(
    P: HomogeneousPotential, path: Path, lattice: FloatArray | None = None
) -> Path:
    """Sample the restriction of P and write it as a CSV table."""
    directions = directionLattice_make(P.k) if lattice is None else lattice
    values = P.direction_values(directions)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([f"theta_{i + 1}" for i in range(P.k)] + ["f"])
        for theta, value in zip(directions, values, strict=True):
            writer.writerow([f"{x:.17g}" for x in (*theta, value)])
    return path


def directionTable_read(path: Path, degree: float) -> HomogeneousPotential:
    """
    Read a CSV direction table as a nearest-lookup potential.

    Raises:
        PotentialFormatError: If the header or a row is malformed.
    """
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][-1] != "f":
        raise PotentialFormatError(f"{path}: missing 'f' column header")
    try:
        table = np.array([[float(x) for x in row] for row in rows[1:]])
    except ValueError as exc:
        raise PotentialFormatError(f"{path}: {exc}") from exc
    if table.ndim != 2 or table.shape[0] == 0:
        raise PotentialFormatError(f"{path}: empty direction table")
    return tablePotential_make(table[:, :-1], table[:, -1], degree)
