"""
Brezis-Lieb splitting for homogeneous potentials

For a continuous positive F of degree p and eps > 0 there is C(eps) with

    |F(s + t) - F(s)| <= eps |s|^p + C(eps) |t|^p      for all s, t.

With delta the uniform-continuity modulus of F on the ball of radius 2 for
the target eps, C = M / delta^p where M = 2^p M_F bounds F on that ball.
The modulus is found by bisection on a sampled sup of |F(a + b) - F(a)|
over unit a and |b| < delta, aiming at eps/2 so that sampling gaps stay
covered.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..models.geometry import VectorRadialField
from ..models.potentials import FloatArray, HomogeneousPotential
from .directions import directionLattice_make
from .log import LOG
from .manifolds import GridMismatch, quadrature_compute
from .potentials import directionSphere_maximize, potential_evaluate


class ModulusNotFound(ValueError):
    """Raised when no sampled modulus of continuity meets the target."""


MODULUS_BASES: int = 1024
MODULUS_OFFSETS: int = 96
DELTA_FLOOR: float = 1.0e-8


def _modulusSample(
    F: HomogeneousPotential,
    delta: float,
    bases: FloatArray,
    offsets: FloatArray,
) -> float:
    radii = np.array([0.25, 0.5, 0.75, 1.0]) * delta
    base_values = np.asarray(potential_evaluate(F, bases))
    worst = 0.0
    for radius in radii:
        for offset in offsets:
            moved = np.asarray(potential_evaluate(F, bases + radius * offset))
            worst = max(worst, float(np.max(np.abs(moved - base_values))))
    return worst


def brezisLieb_modulus(
    F: HomogeneousPotential,
    epsilon: float,
    rng: np.random.Generator | None = None,
) -> float:
    """
    Largest sampled delta in (0, 1) with modulus(delta) <= epsilon / 2.

    Raises:
        ModulusNotFound: If even the floor delta misses the target.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    generator = rng if rng is not None else np.random.default_rng(0)
    lattice = directionLattice_make(F.k)
    stride = max(1, lattice.shape[0] // MODULUS_BASES)
    bases = np.array(lattice[::stride])
    offsets = generator.normal(size=(MODULUS_OFFSETS, F.k))
    offsets /= np.linalg.norm(offsets, axis=1)[:, None]
    offsets = np.vstack([offsets, np.eye(F.k), -np.eye(F.k)])
    target = 0.5 * epsilon

    if _modulusSample(F, DELTA_FLOOR, bases, offsets) > target:
        raise ModulusNotFound(
            f"no delta >= {DELTA_FLOOR:g} certifies epsilon={epsilon:g}"
        )
    high = 1.0 - 1e-9
    if _modulusSample(F, high, bases, offsets) <= target:
        return high
    low = DELTA_FLOOR
    for _ in range(60):
        middle = np.sqrt(low * high)
        if _modulusSample(F, middle, bases, offsets) <= target:
            low = middle
        else:
            high = middle
        if high / low < 1.0 + 1e-6:
            break
    LOG(f"Brezis-Lieb modulus for eps={epsilon:g}: delta={low:.6g}", 3)
    return low


def brezisLieb_constant(
    F: HomogeneousPotential,
    epsilon: float,
    rng: np.random.Generator | None = None,
) -> float:
    """
    Splitting constant C(eps) = 2^p M_F / delta(eps)^p.

    Args:
        F: Positive homogeneous potential of degree p.
        epsilon: Target of the eps |s|^p term.
        rng: Generator for the sampled offsets.
    """
    delta = brezisLieb_modulus(F, epsilon, rng)
    M = 2.0**F.degree * directionSphere_maximize(F).M_F
    return float(M / delta**F.degree)


def brezisLieb_verify(
    F: HomogeneousPotential,
    epsilon: float,
    C: float,
    pairs: int = 100_000,
    rng: np.random.Generator | None = None,
) -> int:
    """
    Count sampled (s, t) pairs violating the splitting inequality.

    Magnitudes of s and t are log-uniform over four decades each, so both
    regimes |t| << |s| and |t| >> |s| are covered; the pair (0, 0) is
    always included.
    """
    generator = rng if rng is not None else np.random.default_rng(0)
    k = F.k

    def draw(count: int) -> FloatArray:
        directions = generator.normal(size=(count, k))
        directions /= np.linalg.norm(directions, axis=1)[:, None]
        scale = 10.0 ** generator.uniform(-2.0, 2.0, size=count)
        return directions * scale[:, None]

    s = np.vstack([np.zeros((1, k)), draw(pairs - 1)])
    t = np.vstack([np.zeros((1, k)), draw(pairs - 1)])
    lhs = np.abs(
        np.asarray(potential_evaluate(F, s + t))
        - np.asarray(potential_evaluate(F, s))
    )
    p = F.degree
    rhs = (
        epsilon * np.linalg.norm(s, axis=1) ** p
        + C * np.linalg.norm(t, axis=1) ** p
    )
    return int(np.count_nonzero(lhs > rhs * (1.0 + 1e-12)))


def brezisLieb_defect(
    F: HomogeneousPotential,
    family: Sequence[VectorRadialField],
    limit: VectorRadialField,
) -> list[float]:
    """
    Defects |int F(U_a) - int F(U_a - U) - int F(U)| along a family.

    Raises:
        GridMismatch: If a member lives on another grid than the limit.
    """
    grid = limit.grid
    limit_mass = quadrature_compute(
        np.asarray(potential_evaluate(F, limit.values)), grid
    )
    defects: list[float] = []
    for member in family:
        if not grid.compatible(member.grid):
            raise GridMismatch("family member lives on a different grid")
        whole = quadrature_compute(
            np.asarray(potential_evaluate(F, member.values)), grid
        )
        rest = quadrature_compute(
            np.asarray(potential_evaluate(F, member.values - limit.values)),
            grid,
        )
        defects.append(abs(whole - rest - limit_mass))
    return defects
