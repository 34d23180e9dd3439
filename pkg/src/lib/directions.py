"""
Direction-sphere lattices

Brute-force sampling of the unit sphere S^(k-1) is the only robust way to
locate maxima of a merely continuous restriction f, so every optimization
over directions starts from one of these lattices:

    k = 1   the two points +1 and -1
    k = 2   uniform angles (contains the axes and the diagonals exactly)
    k = 3   Fibonacci spiral
    k >= 4  quasi-random Halton points in the cube, rejection-sampled to
            the unit ball and projected

Lattices are cached per (k, count) and returned read-only.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma
from scipy.stats import qmc

from ..config import appsettings
from ..models.potentials import FloatArray


def directionLattice_defaultSize(k: int) -> int:
    """Lattice size configured for dimension k."""
    if k == 1:
        return 2
    if k == 2:
        return appsettings.lattice_circle
    if k == 3:
        return appsettings.lattice_sphere
    return appsettings.lattice_high


def directionLattice_make(k: int, count: int | None = None) -> FloatArray:
    """
    Deterministic lattice of unit directions in R^k.

    Args:
        k: Ambient dimension, >= 1.
        count: Number of points; defaults to the configured size.

    Returns:
        Read-only array of shape (count, k).
    """
    if k < 1:
        raise ValueError(f"direction dimension must be >= 1, got {k}")
    size = directionLattice_defaultSize(k) if count is None else count
    if size < 2:
        raise ValueError("a direction lattice needs at least two points")
    return _lattice_cached(k, size)


@lru_cache(maxsize=32)
def _lattice_cached(k: int, size: int) -> FloatArray:
    lattice: FloatArray
    if k == 1:
        lattice = np.array([[1.0], [-1.0]])
    elif k == 2:
        angles = 2.0 * np.pi * np.arange(size) / size
        lattice = np.column_stack([np.cos(angles), np.sin(angles)])
    elif k == 3:
        lattice = _fibonacci_sphere(size)
    else:
        lattice = _halton_sphere(k, size)
    lattice.setflags(write=False)
    return lattice


def _fibonacci_sphere(size: int) -> FloatArray:
    index = np.arange(size) + 0.5
    z = 1.0 - 2.0 * index / size
    azimuth = np.pi * (1.0 + np.sqrt(5.0)) * index
    ring = np.sqrt(1.0 - z * z)
    return np.column_stack(
        [ring * np.cos(azimuth), ring * np.sin(azimuth), z]
    )


def _halton_sphere(k: int, size: int) -> FloatArray:
    sampler = qmc.Halton(d=k, scramble=False)
    accepted: list[FloatArray] = []
    total = 0
    while total < size:
        cube = 2.0 * sampler.random(2 * size) - 1.0
        radius = np.linalg.norm(cube, axis=1)
        keep = (radius > 0.05) & (radius <= 1.0)
        chunk = cube[keep] / radius[keep, None]
        accepted.append(chunk)
        total += chunk.shape[0]
    return np.vstack(accepted)[:size]


def sphereArea_compute(k: int) -> float:
    """Area of the unit sphere S^(k-1) in R^k."""
    return float(2.0 * np.pi ** (k / 2.0) / gamma(k / 2.0))


def directionLattice_spacing(lattice: FloatArray) -> float:
    """Typical angular spacing between neighbouring lattice points."""
    count, k = lattice.shape
    if k == 1:
        return float(np.pi)
    if k == 2:
        return 2.0 * np.pi / count
    return float((sphereArea_compute(k) / count) ** (1.0 / (k - 1)))


def directionLattice_localMaxima(
    lattice: FloatArray, values: FloatArray
) -> np.ndarray:
    """
    Indices of lattice points whose value is not exceeded by a neighbour.

    On the circle the neighbours are the two adjacent angles. In higher
    dimensions the 2k nearest lattice points (by chord length) are used.

    Args:
        lattice: Unit directions, shape (m, k).
        values: Values at the lattice points, shape (m,).

    Returns:
        Integer index array of local maxima.
    """
    count, k = lattice.shape
    if k == 1:
        return np.flatnonzero(values >= values.max())
    if k == 2:
        left = np.roll(values, 1)
        right = np.roll(values, -1)
        return np.flatnonzero((values >= left) & (values >= right))
    tree = cKDTree(lattice)
    neighbours = min(2 * k + 1, count)
    _, index = tree.query(lattice, k=neighbours)
    best = values[index[:, 1:]].max(axis=1)
    return np.flatnonzero(values >= best)
