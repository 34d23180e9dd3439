"""
Variational problem and solver result models
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from .geometry import ModelManifold, VectorRadialField
from .potentials import HomogeneousPotential, SpatialPotential


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    """
    Minimize A * int |grad U|^2 + B * int G(x, U) under int F(U) = 1.

    Attributes:
        manifold: Geometry of the problem.
        F: Degree-2* potential.
        G: Degree-2 spatial potential.
        coeff_A: Gradient coefficient, positive.
        coeff_B: Potential coefficient, nonnegative.
    """

    manifold: ModelManifold
    F: HomogeneousPotential
    G: SpatialPotential
    coeff_A: float
    coeff_B: float

    def __post_init__(self) -> None:
        if self.coeff_A <= 0.0:
            raise ValueError("coefficient A must be positive")
        if self.coeff_B < 0.0:
            raise ValueError("coefficient B must be nonnegative")
        if abs(self.F.degree - self.manifold.critical_exponent) > 1e-12:
            raise ValueError(
                f"F has degree {self.F.degree}, expected "
                f"{self.manifold.critical_exponent} for n={self.manifold.n}"
            )
        if self.F.k != self.G.k:
            raise ValueError("F and G act on different codomains")

    @property
    def k(self) -> int:
        return self.F.k


@dataclass(frozen=True)
class SolverConfig:
    """
    Attributes:
        grid_N: Radial grid intervals.
        step: Initial preconditioned step.
        max_iters: Iteration cap per restart.
        el_tol: Euler-Lagrange residual tolerance.
        smoothing_eps: Tolerance used to smooth non-C^1 potentials; 0
            forbids smoothing.
        seed: Seed of the initial-guess generator.
    """

    grid_N: int = 2048
    step: float = 1.0
    max_iters: int = 400
    el_tol: float = 1.0e-7
    smoothing_eps: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class IterationRecord:
    lam: float
    residual: float
    step: float


@dataclass(frozen=True, eq=False)
class SolverResult:
    """
    Outcome of a constrained minimization.

    Attributes:
        field: Best minimizer, normalized so that int F(U) = 1.
        lam: Energy of `field`.
        el_residual: Euler-Lagrange residual of `field`.
        converged: Whether the residual met the tolerance.
        iterations: Iterations spent on the winning restart.
        history: Per-iteration records of the winning restart.
        restart: Label of the winning initial guess.
        smoothing_eps: Smoothing tolerance actually used.
        warnings: Report warnings.
    """

    field: VectorRadialField
    lam: float
    el_residual: float
    converged: bool
    iterations: int
    history: tuple[IterationRecord, ...]
    restart: str
    smoothing_eps: float = 0.0
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class CandidateEnergy:
    label: str
    value: float


@dataclass(frozen=True)
class PrecheckResult:
    """
    Test-function screening of the strict existence criterion.

    Attributes:
        best_lambda: Smallest normalized energy among the candidates.
        below_one: Whether best_lambda is strictly below the threshold.
        marginal: Whether best_lambda lies within the marginal band.
        normalization: "coefficient" or "appendix".
        threshold: Value best_lambda is compared against.
        candidates: Energy of each candidate.
    """

    best_lambda: float
    below_one: bool
    marginal: bool
    normalization: Literal["coefficient", "appendix"]
    threshold: float
    candidates: tuple[CandidateEnergy, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class LocalCheckResult:
    violations: int
    min_margin: float
    trials: int
    b_epsilon: float
