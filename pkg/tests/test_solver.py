"""
Constrained minimizer tests

Energies and their gradients, the descent on a flat torus where constant
maps are the exact minimizers, the existence precheck and the local
inequality near a point.
"""

from typing import Any

import numpy as np
import pytest

from sobolevlab.lib.constants import (
    a0Euclidean_compute,
    a0Vector_compute,
    b0ScalarSphere_compute,
)
from sobolevlab.lib.fields import field_constant, field_fromProfile
from sobolevlab.lib.manifolds import NonPositiveDensity, radialGrid_make
from sobolevlab.lib.potentials import (
    MissingGradient,
    lqPotential_make,
    spatialPotential_uniform,
)
from sobolevlab.lib.solver import (
    constraintMass_evaluate,
    elResidual_compute,
    energy_evaluate,
    existence_precheck,
    jGradient_compute,
    localInequality_check,
    massGradient_compute,
    problem_minimize,
    quotientGradient_compute,
    quotient_evaluate,
    truncatedBubble_make,
)
from sobolevlab.models.geometry import (
    ManifoldKind,
    ModelManifold,
    VectorRadialField,
)
from sobolevlab.models.potentials import FloatArray
from sobolevlab.models.solver import SolverConfig, VariationalProblem


def torus_problem(B: float, q: float = 2.0) -> VariationalProblem:
    F = lqPotential_make(q, 4.0, 2)
    return VariationalProblem(
        manifold=ModelManifold(ManifoldKind.FLAT_TORUS, 4),
        F=F,
        G=spatialPotential_uniform(lqPotential_make(2.0, 2.0, 2)),
        coeff_A=a0Vector_compute(4, F),
        coeff_B=B,
    )


def sphere_problem(n: int, B: float) -> VariationalProblem:
    F = lqPotential_make(2.0, 2.0 * n / (n - 2), 2)
    return VariationalProblem(
        manifold=ModelManifold(ManifoldKind.ROUND_SPHERE, n),
        F=F,
        G=spatialPotential_uniform(lqPotential_make(2.0, 2.0, 2)),
        coeff_A=a0Vector_compute(n, F),
        coeff_B=B,
    )


def central_difference(
    f: Any, U: VectorRadialField, V: FloatArray, h: float
) -> float:
    plus = f(U.with_values(U.values + h * V))
    minus = f(U.with_values(U.values - h * V))
    return float((plus - minus) / (2.0 * h))


class TestProblem:
    """Validation of the variational problem"""

    def test_positive_A(self) -> None:
        problem = torus_problem(0.5)
        with pytest.raises(ValueError, match="A must be positive"):
            VariationalProblem(
                problem.manifold, problem.F, problem.G, 0.0, 0.5
            )

    def test_degree(self) -> None:
        problem = torus_problem(0.5)
        with pytest.raises(ValueError, match="degree"):
            VariationalProblem(
                ModelManifold(ManifoldKind.FLAT_TORUS, 5),
                problem.F,
                problem.G,
                1.0,
                0.5,
            )

    def test_codomains(self) -> None:
        problem = torus_problem(0.5)
        G = spatialPotential_uniform(lqPotential_make(2.0, 2.0, 3))
        with pytest.raises(ValueError, match="codomains"):
            VariationalProblem(problem.manifold, problem.F, G, 1.0, 0.5)


class TestEnergies:
    """J, the quotient and their derivatives"""

    def test_quotient_scale_invariant(self) -> None:
        problem = sphere_problem(4, 0.3)
        grid = radialGrid_make(problem.manifold, 128)
        U = field_fromProfile(grid, 2.0 + np.cos(grid.r), [0.6, 0.8])
        V = U.with_values(3.0 * U.values)
        assert quotient_evaluate(V, problem) == pytest.approx(
            quotient_evaluate(U, problem)
        )
        assert energy_evaluate(V, problem) == pytest.approx(
            9.0 * energy_evaluate(U, problem)
        )

    def test_quotient_zero_field(self) -> None:
        problem = sphere_problem(4, 0.3)
        grid = radialGrid_make(problem.manifold, 64)
        with pytest.raises(NonPositiveDensity):
            quotient_evaluate(field_constant(grid, 0.0, [1.0, 0.0]), problem)

    def test_gradient_matches_difference(self) -> None:
        """J is quadratic, so central differences are exact"""
        problem = sphere_problem(4, 0.3)
        grid = radialGrid_make(problem.manifold, 64)
        U = field_fromProfile(grid, 1.0 + np.cos(grid.r), [0.6, 0.8])
        V = U.with_values(
            np.random.default_rng(5).normal(size=U.values.shape)
        )
        h = 1e-3
        plus = energy_evaluate(U.with_values(U.values + h * V.values), problem)
        minus = energy_evaluate(
            U.with_values(U.values - h * V.values), problem
        )
        directional = float(np.sum(jGradient_compute(U, problem) * V.values))
        assert (plus - minus) / (2.0 * h) == pytest.approx(
            directional, rel=1e-8
        )

    def test_mass_gradient_matches_difference(self) -> None:
        problem = sphere_problem(4, 0.3)
        grid = radialGrid_make(problem.manifold, 64)
        U = field_fromProfile(grid, 1.0 + np.cos(grid.r), [0.6, 0.8])
        gradient = massGradient_compute(U, problem)
        rng = np.random.default_rng(11)
        for _ in range(20):
            V = rng.normal(size=U.values.shape)
            directional = float(np.sum(gradient * V))
            difference = central_difference(
                lambda W: constraintMass_evaluate(W, problem), U, V, 1e-4
            )
            scale = float(np.linalg.norm(gradient) * np.linalg.norm(V))
            assert difference == pytest.approx(
                directional, rel=1e-5, abs=1e-9 * scale
            )

    def test_quotient_gradient_matches_difference(self) -> None:
        problem = sphere_problem(4, 0.3)
        grid = radialGrid_make(problem.manifold, 64)
        U = field_fromProfile(grid, 1.0 + np.cos(grid.r), [0.6, 0.8])
        gradient = quotientGradient_compute(U, problem)
        rng = np.random.default_rng(12)
        for _ in range(20):
            V = rng.normal(size=U.values.shape)
            directional = float(np.sum(gradient * V))
            difference = central_difference(
                lambda W: quotient_evaluate(W, problem), U, V, 1e-5
            )
            scale = float(np.linalg.norm(gradient) * np.linalg.norm(V))
            assert difference == pytest.approx(
                directional, rel=1e-5, abs=1e-9 * scale
            )

    def test_quotient_gradient_vanishes_at_constants(self) -> None:
        problem = torus_problem(0.5)
        grid = radialGrid_make(problem.manifold, 64)
        U = field_constant(grid, 3.0, [0.6, 0.8])
        assert quotientGradient_compute(U, problem) == pytest.approx(
            np.zeros((64, 2)), abs=1e-12
        )

    def test_constant_is_critical(self) -> None:
        problem = torus_problem(0.5)
        grid = radialGrid_make(problem.manifold, 64)
        U = field_constant(grid, 3.0, [0.6, 0.8])
        assert elResidual_compute(U, problem) == pytest.approx(0.0, abs=1e-12)

    def test_residual_needs_gradient(self) -> None:
        problem = torus_problem(0.5, q=1.0)
        grid = radialGrid_make(problem.manifold, 64)
        with pytest.raises(MissingGradient, match="no gradient"):
            elResidual_compute(field_constant(grid, 1.0, [1.0, 0.0]), problem)

    def test_truncated_bubble(self) -> None:
        sphere = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
        grid = radialGrid_make(sphere, 128)
        U = truncatedBubble_make(grid, 0.1, np.array([1.0, 0.0]))
        profile = U.values[:, 0]
        assert int(np.argmax(profile)) == 0
        assert profile[-1] == pytest.approx(0.0, abs=1e-15)
        assert np.all(profile >= 0.0)
        assert np.all(U.values[:, 1] == 0.0)


class TestMinimize:
    """Descent on the constraint set int F(U) = 1"""

    def test_torus_constant_minimizer(self) -> None:
        """Unit torus: U = t0, lambda = B"""
        config = SolverConfig(grid_N=128, max_iters=200)
        result = problem_minimize(torus_problem(0.5), config)
        assert result.restart == "constant"
        assert result.converged
        assert result.lam == pytest.approx(0.5, rel=1e-8)
        assert result.field.norm == pytest.approx(np.ones(128), rel=1e-8)
        assert result.history[0].lam >= result.lam
        assert result.iterations == len(result.history)
        assert result.warnings == ()

    def test_round_sphere_identity(self) -> None:
        """A = A0(n), B = omega_n^(-2/n): constant maps give lambda = 1"""
        n, N = 4, 512
        problem = VariationalProblem(
            manifold=ModelManifold(ManifoldKind.ROUND_SPHERE, n),
            F=lqPotential_make(2.0, 4.0, 1),
            G=spatialPotential_uniform(lqPotential_make(2.0, 2.0, 1)),
            coeff_A=a0Euclidean_compute(n),
            coeff_B=b0ScalarSphere_compute(n, N),
        )
        grid = radialGrid_make(problem.manifold, N)
        constant = field_constant(grid, 1.0, [1.0])
        assert quotient_evaluate(constant, problem) == pytest.approx(
            1.0, abs=1e-10
        )
        result = problem_minimize(
            problem, SolverConfig(grid_N=N, max_iters=100)
        )
        assert result.lam == pytest.approx(1.0, abs=5e-3)

    def test_non_smooth_needs_epsilon(self) -> None:
        config = SolverConfig(grid_N=64, max_iters=10)
        with pytest.raises(MissingGradient, match="smoothing_eps"):
            problem_minimize(torus_problem(0.5, q=1.0), config)

    def test_smoothing_is_reported(self) -> None:
        config = SolverConfig(grid_N=64, max_iters=50, smoothing_eps=1e-2)
        result = problem_minimize(torus_problem(0.5, q=1.0), config)
        assert result.smoothing_eps == 1e-2
        assert any("smoothed" in w for w in result.warnings)


class TestPrecheck:
    """Screening of the strict existence criterion"""

    def test_torus_below_one(self) -> None:
        result = existence_precheck(torus_problem(0.5), grid_N=128)
        assert result.below_one
        assert result.candidates[0].label == "constant"
        assert result.candidates[0].value == pytest.approx(0.5, rel=1e-10)
        assert result.best_lambda <= result.candidates[0].value
        assert len(result.candidates) == 4

    def test_normalizations_agree(self) -> None:
        problem = torus_problem(0.5)
        coefficient = existence_precheck(problem, grid_N=128)
        appendix = existence_precheck(problem, None, "appendix", 128)
        assert appendix.best_lambda / appendix.threshold == pytest.approx(
            coefficient.best_lambda
        )

    def test_sphere_bubbles_marginal(self) -> None:
        problem = sphere_problem(5, 0.0)
        grid = radialGrid_make(problem.manifold, 4096)
        t0 = np.array([1.0, 0.0])
        candidates = [
            truncatedBubble_make(grid, scale, t0) for scale in (0.01, 0.02)
        ]
        result = existence_precheck(problem, candidates)
        assert result.marginal
        assert [c.label for c in result.candidates] == [
            "candidate[0]",
            "candidate[1]",
        ]

    def test_unknown_normalization(self) -> None:
        normalization: Any = "energy"
        with pytest.raises(ValueError, match="unknown normalization"):
            existence_precheck(torus_problem(0.5), None, normalization, 64)


class TestLocalInequality:
    """A0(n,F) and B_eps(F,G,g) hold on small balls"""

    def test_no_violations(self) -> None:
        result = localInequality_check(
            sphere_problem(5, 0.1),
            0.1,
            0.1,
            trials=100,
            rng=np.random.default_rng(2),
            grid_N=2048,
        )
        assert result.violations == 0
        assert result.trials == 100
        assert result.min_margin >= 0.0

    def test_torus_no_violations(self) -> None:
        result = localInequality_check(
            torus_problem(0.5),
            0.2,
            0.1,
            trials=100,
            rng=np.random.default_rng(3),
            grid_N=1024,
        )
        assert result.violations == 0
        assert result.b_epsilon == pytest.approx(0.1)

    def test_radius_range(self) -> None:
        with pytest.raises(ValueError, match="must lie in"):
            localInequality_check(sphere_problem(5, 0.1), 4.0, 0.1, grid_N=64)
