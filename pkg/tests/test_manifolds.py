"""
Radial geometry tests

Grids, quadrature, the radial Laplacian, Dirichlet energies, scalar
curvature, ball masses and the conformal factor solver.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sobolevlab.lib.fields import field_fromProfile
from sobolevlab.lib.manifolds import (
    GridMismatch,
    GridTooCoarse,
    NonPositiveDensity,
    OddGridIntervals,
    OffPoleCenter,
    ballIntegral_compute,
    ballMass_compute,
    conformalFactor_evaluate,
    conformalFactor_solve,
    conformalFactor_spike,
    conformalFactor_table,
    gradientDirichlet_compute,
    quadrature_compute,
    radialGrid_make,
    radialLaplacian_apply,
    scalarCurvature_at,
    scalarCurvature_profile,
    stiffness_assemble,
    unitSphere_volume,
    volume_compute,
)
from sobolevlab.models.geometry import ManifoldKind, ModelManifold


def sphere(n: int) -> ModelManifold:
    return ModelManifold(ManifoldKind.ROUND_SPHERE, n)


BALL_GRID = radialGrid_make(ModelManifold(ManifoldKind.ROUND_SPHERE, 4), 128)


class TestGrids:
    """Node layout and quadrature weights"""

    def test_sphere_volume(self) -> None:
        """omega_4 = 8 pi^2 / 3"""
        assert volume_compute(sphere(4), 512) == pytest.approx(
            8.0 * np.pi**2 / 3.0, rel=1e-10
        )
        assert unitSphere_volume(4) == pytest.approx(8.0 * np.pi**2 / 3.0)

    def test_torus_volume(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 4, side=2.0)
        grid = radialGrid_make(M, 64)
        assert grid.periodic
        assert float(grid.weights.sum()) == pytest.approx(16.0)
        assert grid.r_max == pytest.approx(1.0)

    def test_euclidean_nodes(self) -> None:
        M = ModelManifold(ManifoldKind.EUCLIDEAN_BALL, 3, radius=50.0)
        grid = radialGrid_make(M, 256)
        assert grid.r[0] == 0.0
        assert grid.r[-1] == pytest.approx(50.0)
        assert np.all(np.diff(grid.r) > 0.0)

    def test_poles_have_zero_weight(self) -> None:
        grid = radialGrid_make(sphere(5), 64)
        assert grid.weights[0] == 0.0
        assert grid.weights[-1] == 0.0

    def test_too_coarse(self) -> None:
        with pytest.raises(GridTooCoarse, match="16"):
            radialGrid_make(sphere(4), 8)

    def test_odd_intervals(self) -> None:
        with pytest.raises(OddGridIntervals, match="even"):
            radialGrid_make(sphere(4), 65)

    def test_profile_length(self) -> None:
        grid = radialGrid_make(sphere(4), 32)
        with pytest.raises(GridMismatch):
            quadrature_compute(np.ones(10), grid)

    def test_dimension_floor(self) -> None:
        with pytest.raises(ValueError, match=">= 3"):
            sphere(2)


class TestQuadrature:
    """Composite Simpson weights against the lumped masses"""

    def test_simpson_pattern(self) -> None:
        grid = radialGrid_make(sphere(4), 64)
        ratio = grid.quadrature[1:-1] / grid.weights[1:-1]
        assert ratio[0::2] == pytest.approx(np.full(32, 4.0 / 3.0))
        assert ratio[1::2] == pytest.approx(np.full(31, 2.0 / 3.0))

    def test_torus_rules_coincide(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 4)
        grid = radialGrid_make(M, 64)
        assert np.array_equal(grid.quadrature, grid.weights)

    def test_ball_volume_order(self) -> None:
        """
        The tangent map leaves an endpoint derivative at the outer radius,
        so the lumped masses are only second order there.
        """
        M = ModelManifold(ManifoldKind.EUCLIDEAN_BALL, 3, radius=2.0)
        exact = 4.0 * np.pi * 8.0 / 3.0
        simpson = volume_compute(M, 64)
        lumped = float(radialGrid_make(M, 64).weights.sum())
        assert simpson == pytest.approx(exact, rel=1e-4)
        assert abs(lumped - exact) > 10.0 * abs(simpson - exact)

    def test_sphere_moment(self) -> None:
        """int_S3 r dv = 4 pi * pi^2 / 4"""
        grid = radialGrid_make(sphere(3), 256)
        assert quadrature_compute(grid.r, grid) == pytest.approx(
            np.pi**3, rel=1e-9
        )


class TestLaplacian:
    """Laplace-Beltrami operator on radial profiles"""

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_first_eigenfunction(self, n: int) -> None:
        """Lap cos r = -n cos r on S^n"""
        grid = radialGrid_make(sphere(n), 2048)
        u = np.cos(grid.r)
        lap = radialLaplacian_apply(u, grid)
        band = (grid.r > 0.5) & (grid.r < np.pi - 0.5)
        assert lap[band] == pytest.approx(-n * u[band], abs=1e-4)
        assert lap[0] == pytest.approx(-n, rel=1e-5)
        assert lap[-1] == pytest.approx(n, rel=1e-5)

    def test_euclidean_quadratic(self) -> None:
        """Lap r^2 = 2n away from the outer edge"""
        M = ModelManifold(ManifoldKind.EUCLIDEAN_BALL, 4, radius=10.0)
        grid = radialGrid_make(M, 4096)
        lap = radialLaplacian_apply(grid.r**2, grid)
        inner = (grid.r > 0.2) & (grid.r < 1.0)
        assert lap[inner] == pytest.approx(8.0, rel=1e-3)

    def test_torus_constant(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 4)
        grid = radialGrid_make(M, 64)
        assert radialLaplacian_apply(np.ones(64), grid) == pytest.approx(
            np.zeros(64)
        )

    def test_self_adjoint(self) -> None:
        """<Lap u, v>_W = <u, Lap v>_W = -u^T K v off the poles"""
        grid = radialGrid_make(sphere(4), 256)
        u = np.sin(grid.r) ** 2 * np.cos(grid.r)
        v = np.sin(grid.r) ** 2
        left = float(grid.weights @ (radialLaplacian_apply(u, grid) * v))
        right = float(grid.weights @ (u * radialLaplacian_apply(v, grid)))
        assert left == pytest.approx(right, rel=1e-10)
        K = stiffness_assemble(grid)
        assert left == pytest.approx(-float(u @ (K @ v)), rel=1e-10)

    def test_refinement_converges(self) -> None:
        errors = []
        for N in (256, 512, 1024):
            grid = radialGrid_make(sphere(4), N)
            u = np.cos(grid.r)
            band = (grid.r > 0.5) & (grid.r < np.pi - 0.5)
            lap = radialLaplacian_apply(u, grid)
            errors.append(float(np.abs(lap[band] + 4.0 * u[band]).max()))
        assert errors[1] < 0.3 * errors[0]
        assert errors[2] < 0.3 * errors[1]

    def test_component_stack(self) -> None:
        grid = radialGrid_make(sphere(4), 256)
        u = np.cos(grid.r)
        lap = radialLaplacian_apply(np.column_stack([u, 2.0 * u]), grid)
        assert lap.shape == (257, 2)
        assert lap[:, 1] == pytest.approx(2.0 * lap[:, 0])


class TestDirichlet:
    """Dirichlet energy and stiffness"""

    def test_rayleigh_quotient(self) -> None:
        """int |grad cos r|^2 = n int cos^2 r on S^n"""
        grid = radialGrid_make(sphere(4), 2048)
        u = np.cos(grid.r)
        energy = gradientDirichlet_compute(u, grid)
        assert energy == pytest.approx(
            4.0 * quadrature_compute(u * u, grid), rel=1e-4
        )

    def test_stiffness_quadratic_form(self) -> None:
        grid = radialGrid_make(sphere(4), 128)
        u = np.sin(grid.r) ** 2
        K = stiffness_assemble(grid)
        assert float(u @ (K @ u)) == pytest.approx(
            gradientDirichlet_compute(u, grid)
        )

    def test_constants_have_no_energy(self) -> None:
        grid = radialGrid_make(sphere(5), 64)
        U = field_fromProfile(grid, np.ones(65), [0.6, 0.8])
        assert gradientDirichlet_compute(U) == pytest.approx(0.0)

    def test_raw_profile_needs_grid(self) -> None:
        with pytest.raises(ValueError, match="grid"):
            gradientDirichlet_compute(np.ones(10))


class TestCurvature:
    """Scalar curvature of the model manifolds"""

    def test_round(self) -> None:
        assert scalarCurvature_at(sphere(4), 1.0) == 12.0

    def test_torus(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 4)
        assert scalarCurvature_at(M, 0.2) == 0.0

    def test_flat_spike_is_round(self) -> None:
        M = ModelManifold(
            ManifoldKind.CONFORMAL_SPHERE,
            4,
            conformal_factor=conformalFactor_spike(0.0, 1.0),
        )
        S = scalarCurvature_profile(radialGrid_make(M, 256))
        assert S == pytest.approx(12.0)

    def test_constant_factor_rescales(self) -> None:
        """phi = c gives S = n(n-1) c^(2 - 2*)"""
        nodes = np.linspace(0.0, np.pi, 8)
        factor = conformalFactor_table(nodes, np.full(8, 2.0))
        M = ModelManifold(
            ManifoldKind.CONFORMAL_SPHERE, 4, conformal_factor=factor
        )
        S = scalarCurvature_profile(radialGrid_make(M, 256))
        assert S == pytest.approx(12.0 * 2.0 ** (2.0 - 4.0))

    def test_spike_raises_pole_curvature(self) -> None:
        M = ModelManifold(
            ManifoldKind.CONFORMAL_SPHERE,
            4,
            conformal_factor=conformalFactor_spike(1.0, 0.3),
        )
        grid = radialGrid_make(M, 2048)
        assert scalarCurvature_at(M, 0.0, grid) > 12.0

    def test_negative_factor(self) -> None:
        M = ModelManifold(
            ManifoldKind.CONFORMAL_SPHERE,
            4,
            conformal_factor=conformalFactor_spike(-2.0, 0.5),
        )
        with pytest.raises(NonPositiveDensity):
            radialGrid_make(M, 64)


class TestBallMasses:
    """Integrals over geodesic balls about the pole"""

    def test_full_ball_is_total(self) -> None:
        grid = radialGrid_make(sphere(4), 256)
        density = 1.0 + np.cos(grid.r)
        total = quadrature_compute(density, grid)
        assert ballIntegral_compute(density, grid, np.pi) == pytest.approx(
            total
        )

    def test_monotone_in_radius(self) -> None:
        grid = radialGrid_make(sphere(4), 256)
        density = np.ones(257)
        masses = [
            ballIntegral_compute(density, grid, d)
            for d in np.linspace(0.0, np.pi, 30)
        ]
        assert masses[0] == 0.0
        assert np.all(np.diff(masses) >= 0.0)

    @given(
        st.lists(
            st.floats(min_value=0.0, max_value=float(np.pi)),
            min_size=2,
            max_size=20,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_monotone_any_radii(self, radii: list[float]) -> None:
        density = 1.0 + np.cos(BALL_GRID.r)
        masses = [
            ballIntegral_compute(density, BALL_GRID, d) for d in sorted(radii)
        ]
        assert np.all(np.diff(masses) >= 0.0)

    def test_l2_and_dirichlet(self) -> None:
        grid = radialGrid_make(sphere(4), 512)
        U = field_fromProfile(grid, np.cos(grid.r), [1.0])
        l2 = ballMass_compute(U, 10.0, "L2")
        expected = quadrature_compute(np.cos(grid.r) ** 2, grid)
        assert l2 == pytest.approx(expected)
        dirichlet = ballMass_compute(U, np.pi, "Dirichlet")
        assert dirichlet == pytest.approx(gradientDirichlet_compute(U))

    def test_off_pole(self) -> None:
        grid = radialGrid_make(sphere(4), 64)
        U = field_fromProfile(grid, np.ones(65), [1.0])
        with pytest.raises(OffPoleCenter):
            ballMass_compute(U, 0.5, "L2", center=0.1)


class TestConformalFactors:
    """Spike, table and solved conformal factors"""

    def test_spike_values(self) -> None:
        cf = conformalFactor_spike(3.0, 0.5)
        values = conformalFactor_evaluate(cf, np.array([0.0, 0.5]))
        assert values == pytest.approx([4.0, 1.0 + 3.0 / np.e])

    def test_solve_constant_source(self) -> None:
        """-c Lap u + u = 1 has the solution u = 1"""
        cf = conformalFactor_solve(4, lambda r: np.ones_like(r), N=256)
        assert cf.values is not None
        assert cf.values == pytest.approx(np.ones(257), abs=1e-10)

    def test_solve_peaked_source(self) -> None:
        cf = conformalFactor_solve(
            4, lambda r: 1.0 + 20.0 * np.exp(-((r / 0.2) ** 2)), N=512
        )
        assert cf.values is not None
        assert float(cf.values.min()) > 0.0
        assert int(np.argmax(cf.values)) == 0
