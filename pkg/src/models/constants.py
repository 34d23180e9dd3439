"""
Best-constant report models

A BestConstantReport carries every certified bound on the second constant
of a vector-valued Sobolev inequality, each tagged with the argument that
produced it. DichotomyVerdict records how the bounds compare with the
local geometric threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Literal


class BoundProvenance(str, Enum):
    """Argument a bound comes from."""

    TRIVIAL = "trivial-test-function"
    GEOMETRIC = "geometric"
    DES1_LOWER = "des1-lower"
    DES1_UPPER = "des1-upper"


class Verdict(str, Enum):
    STRICTLY_ABOVE = "StrictlyAbove"
    TOUCHES_WITHIN = "TouchesWithin"
    UNDETERMINED = "Undetermined"


class ReferenceModel(str, Enum):
    """Literature models with known upper bounds for B0(n, F)."""

    PRODUCT_CIRCLE_SPHERE = "S1xSn-1"
    PROJECTIVE_SPACE = "ProjectiveSpace"


@dataclass(frozen=True)
class BoundEntry:
    side: Literal["lower", "upper"]
    value: float
    provenance: BoundProvenance
    detail: str = ""


@dataclass(frozen=True)
class BestConstantReport:
    """
    Everything known about the best constants for (F, G, M).

    Attributes:
        n: Manifold dimension.
        k: Codomain dimension.
        A0_n: Scalar Euclidean best constant.
        M_F: Maximum of F on the direction sphere.
        A0_nF: Vector first best constant M_F^(2/2*) * A0_n.
        B0_scalar: Scalar second best constant, None where unknown.
        m_G: Global minimum of G over manifold and direction sphere.
        threshold_sup: Supremum of the local geometric threshold.
        lower: Certified lower bounds.
        upper: Certified upper bounds.
        exact: Exact value when the upper bound is attained.
        exact_reason: Why `exact` is known.
        inconsistent: True when some lower bound exceeds some upper bound.
        warnings: Report warnings.
    """

    n: int
    k: int
    A0_n: float
    M_F: float
    A0_nF: float
    B0_scalar: float | None
    m_G: float
    threshold_sup: float | None
    lower: tuple[BoundEntry, ...]
    upper: tuple[BoundEntry, ...]
    exact: float | None = None
    exact_reason: str = ""
    inconsistent: bool = False
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def max_lower(self) -> float:
        if not self.lower:
            return 0.0
        return max(entry.value for entry in self.lower)

    @property
    def min_upper(self) -> float:
        if not self.upper:
            return float("inf")
        return min(entry.value for entry in self.upper)

    def bound(self, provenance: BoundProvenance) -> BoundEntry | None:
        """Look up the entry produced by a given argument."""
        for entry in (*self.lower, *self.upper):
            if entry.provenance is provenance:
                return entry
        return None


@dataclass(frozen=True)
class DichotomyVerdict:
    threshold_sup: float
    b0_lower: float
    b0_upper: float
    verdict: Verdict
    tolerance: float
    warnings: tuple[str, ...] = field(default_factory=tuple)
