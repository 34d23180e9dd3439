"""
Run configuration loading and object construction.

A run is described by a YAML key-value file read with ``yaml.safe_load``
and validated into a RunConfig; command-line flags are merged on top as a
nested override mapping. The builders below turn the validated specs into
manifolds and potentials, resolving any referenced file against the input
directory.
"""

from __future__ import annotations

import csv
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import ValidationError

from ..models.geometry import ConformalFactor, ManifoldKind, ModelManifold
from ..models.potentials import (
    HomogeneousPotential,
    RadialCoefficient,
    SpatialPotential,
)
from ..models.run import (
    CoefficientSpec,
    ConformalFactorSpec,
    ManifoldSpec,
    PotentialSpec,
    RunConfig,
    SpatialPotentialSpec,
)
from .log import LOG
from .manifolds import conformalFactor_spike, conformalFactor_table
from .potentials import (
    absBilinearPotential_make,
    coordinatePowerPotential_make,
    lqPotential_make,
    spatialPotential_uniform,
    spatialQuadraticForm_make,
)
from .potentials_io import (
    PotentialFormatError,
    directionTable_read,
    potential_fromDict,
)


class ConfigError(ValueError):
    """Raised when a run configuration is unreadable or out of range."""


ConfigMapping = dict[str, Any]

F_PRESETS: dict[str, Callable[[int, float], HomogeneousPotential]] = {
    "lq2": lambda k, degree: lqPotential_make(2.0, degree, k),
    "lq1": lambda k, degree: lqPotential_make(1.0, degree, k),
    "coordinate-half": lambda k, degree: coordinatePowerPotential_make(
        [1.0] + [0.5] * (k - 1), degree
    ),
}

G_PRESETS: dict[str, Callable[[int], SpatialPotential]] = {
    "norm": lambda k: spatialPotential_uniform(lqPotential_make(2.0, 2.0, k)),
    "ripple": lambda k: spatialPotential_uniform(
        lqPotential_make(2.0, 2.0, k), RadialCoefficient(1.0, 0.5, 1.0)
    ),
    "diagonal": lambda k: absBilinearPotential_make(
        np.diag(np.arange(1.0, k + 1.0)).tolist()
    ),
}


def runConfig_read(path: Path) -> ConfigMapping:
    """Read a YAML run file into a plain mapping.

    Args:
        path: File to read.

    Returns:
        Parsed mapping; an empty file gives an empty mapping.

    Raises:
        ConfigError: If the file is missing, unparsable or not a mapping.
    """
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            data: Any = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse {path.name}: {e}") from e
    except OSError as e:
        raise ConfigError(f"Failed to load {path.name}: {e}") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path.name} must contain a mapping")
    return data


def _merge(base: Mapping[str, Any], top: Mapping[str, Any]) -> ConfigMapping:
    merged = dict(base)
    for key, value in top.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def runConfig_build(
    data: Mapping[str, Any], overrides: Mapping[str, Any] | None = None
) -> RunConfig:
    """Validate file values with command-line overrides on top.

    Raises:
        ConfigError: On unknown keys or out-of-range values.
    """
    merged = _merge(data, overrides or {})
    try:
        config = RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration:\n{e}") from e
    LOG(f"run config: task={config.task} n={config.manifold.n}", 2)
    return config


def _referenced(inputdir: Path, relative: str) -> Path:
    path = inputdir / relative
    if not path.is_file():
        raise ConfigError(f"referenced file not found: {path}")
    return path


def _factorCsv_read(path: Path) -> tuple[list[float], list[float]]:
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    try:
        nodes = [float(row["r"]) for row in rows]
        values = [float(row["phi"]) for row in rows]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{path.name}: need numeric r, phi columns") from e
    if len(nodes) < 4:
        raise ConfigError(f"{path.name}: need at least 4 samples")
    return nodes, values


def _conformalFactor_build(
    spec: ConformalFactorSpec, inputdir: Path
) -> ConformalFactor:
    if spec.kind == "spike":
        return conformalFactor_spike(spec.height, spec.width)
    if spec.kind == "table":
        assert spec.nodes is not None and spec.values is not None
        nodes, values = spec.nodes, spec.values
        label = "table"
    else:
        assert spec.path is not None
        nodes, values = _factorCsv_read(_referenced(inputdir, spec.path))
        label = spec.path
    if min(values) <= 0.0:
        raise ConfigError("conformal factor must be positive")
    return conformalFactor_table(
        np.asarray(nodes), np.asarray(values), label=label
    )


def manifold_build(spec: ManifoldSpec, inputdir: Path) -> ModelManifold:
    """Model manifold of a manifold spec."""
    factor = None
    if spec.kind == "conformal-sphere":
        assert spec.conformal_factor is not None
        factor = _conformalFactor_build(spec.conformal_factor, inputdir)
    try:
        return ModelManifold(
            kind=ManifoldKind(spec.kind),
            n=spec.n,
            side=spec.side,
            radius=spec.radius,
            conformal_factor=factor,
            label=spec.kind,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def potential_build(
    spec: PotentialSpec, n: int, inputdir: Path
) -> HomogeneousPotential:
    """
    Degree-2* potential of a potential spec.

    Raises:
        ConfigError: On an unknown kind, bad parameters, a missing table
            file or a potential of the wrong degree.
    """
    degree = 2.0 * n / (n - 2)
    if spec.kind == "table" and not spec.path:
        raise ConfigError("table potential needs a path")
    try:
        if spec.kind in F_PRESETS:
            P = F_PRESETS[spec.kind](spec.k, degree)
        elif spec.kind == "table":
            assert spec.path is not None
            table = _referenced(inputdir, spec.path)
            P = directionTable_read(table, degree)
        else:
            P = potential_fromDict(
                {
                    "kind": spec.kind,
                    "k": spec.k,
                    "degree": degree,
                    "params": spec.params,
                }
            )
    except ConfigError:
        raise
    except (PotentialFormatError, ValueError) as e:
        raise ConfigError(f"potential '{spec.kind}': {e}") from e
    if P.k != spec.k:
        raise ConfigError(f"potential acts on R^{P.k}, expected R^{spec.k}")
    if abs(P.degree - degree) > 1e-12:
        raise ConfigError(
            f"F must have degree 2* = {degree:g}, got {P.degree:g}"
        )
    return P


def _entry(value: float | CoefficientSpec) -> RadialCoefficient | float:
    if isinstance(value, CoefficientSpec):
        return RadialCoefficient(
            value.offset, value.amplitude, value.frequency
        )
    return float(value)


def spatialPotential_build(
    spec: SpatialPotentialSpec, k: int
) -> SpatialPotential:
    """
    Degree-2 spatial potential of a spec, acting on R^k.

    Raises:
        ConfigError: On an unknown kind or a matrix of the wrong size.
    """
    if spec.kind in G_PRESETS:
        return G_PRESETS[spec.kind](k)
    if spec.kind not in ("quadratic-form", "abs-bilinear"):
        known = ", ".join([*G_PRESETS, "quadratic-form", "abs-bilinear"])
        raise ConfigError(f"unknown G kind '{spec.kind}' (known: {known})")
    assert spec.matrix is not None
    if len(spec.matrix) != k:
        raise ConfigError(f"G matrix is {len(spec.matrix)}x, expected {k}x")
    matrix = [[_entry(value) for value in row] for row in spec.matrix]
    try:
        if spec.kind == "quadratic-form":
            return spatialQuadraticForm_make(matrix)
        return absBilinearPotential_make(matrix)
    except ValueError as e:
        raise ConfigError(f"G: {e}") from e
