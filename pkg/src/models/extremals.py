"""
Closed-form extremal parameters and factorization results
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .potentials import FloatArray


class Inequality(str, Enum):
    """Inequalities whose equality cases can be checked on a field."""

    SCALAR_SPHERE = "E.1"
    EUCLIDEAN_VECTOR = "Euc"
    SCALAR_OPTIMAL = "B-opt"
    VECTOR_OPTIMAL = "B-opt-v"


def _unit_check(t0: FloatArray) -> FloatArray:
    direction = np.asarray(t0, dtype=np.float64)
    if direction.ndim != 1 or direction.size == 0:
        raise ValueError("t0 must be a non-empty vector")
    if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-12:
        raise ValueError("t0 must be a unit vector")
    return direction


@dataclass(frozen=True, eq=False)
class BubbleParams:
    """Euclidean bubble a * (1 + (b r)^2)^((2-n)/2) along t0."""

    n: int
    a: float
    b: float
    t0: FloatArray = field(default_factory=lambda: np.ones(1))

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("bubble dimension must be >= 3")
        if self.a == 0.0 or self.b == 0.0:
            raise ValueError("bubble amplitude and scale must be nonzero")
        object.__setattr__(self, "t0", _unit_check(self.t0))


@dataclass(frozen=True, eq=False)
class SphereExtremalParams:
    """Round-sphere extremal with concentration parameter beta along t0."""

    n: int
    beta: float
    t0: FloatArray = field(default_factory=lambda: np.ones(1))

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("extremal dimension must be >= 3")
        object.__setattr__(self, "t0", _unit_check(self.t0))


@dataclass(frozen=True, eq=False)
class Factorization:
    """
    Best split U ~ t0 * u of a field.

    Attributes:
        t0: Normalized direction of the weighted mean of U |U|^(2*-2).
        profile: Scalar profile u = <U, t0>.
        deviation: L2 distance of U to t0 * u, relative to the L2 norm of U.
        maximizing: Whether t0 maximizes F on the direction sphere; None
            when no potential was supplied.
    """

    t0: FloatArray
    profile: FloatArray
    deviation: float
    maximizing: bool | None = None


@dataclass(frozen=True)
class ExtremalSweepRow:
    beta: float
    pole_value: float
    f_mass: float
    residual: float
