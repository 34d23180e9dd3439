"""
Best constant tests

The Euclidean constant A0(n), its vector lift, the bound table for the
second constant, the dichotomy verdict and bound continuity.
"""

from dataclasses import replace
from functools import cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from sobolevlab.lib.constants import (
    NonFiniteConstant,
    TailNotConverged,
    UnknownScalarB0,
    a0Euclidean_compute,
    a0Vector_compute,
    b0Bounds_assemble,
    b0ScalarSphere_compute,
    bEpsilon_compute,
    bounds_continuityCheck,
    dichotomy_classify,
    geometricThreshold_compute,
    referenceUpperBound_lookup,
)
from sobolevlab.lib.manifolds import radialGrid_make, unitSphere_volume
from sobolevlab.lib.potentials import (
    absBilinearPotential_make,
    coordinatePowerPotential_make,
    lqPotential_make,
    potential_scale,
    spatialPotential_scale,
    spatialPotential_uniform,
)
from sobolevlab.models.constants import (
    BestConstantReport,
    BoundProvenance,
    Verdict,
)
from sobolevlab.models.geometry import ManifoldKind, ModelManifold
from sobolevlab.models.potentials import SpatialPotential


def critical(n: int) -> float:
    return 2.0 * n / (n - 2)


def norm_G(k: int) -> SpatialPotential:
    return spatialPotential_uniform(lqPotential_make(2.0, 2.0, k))


SCALING_SPHERE = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
SCALING_F = coordinatePowerPotential_make([1.0, 0.5], 4.0)
SCALING_G = absBilinearPotential_make([[2.0, 0.0], [0.0, 1.0]])


@cache
def scaling_base() -> BestConstantReport:
    return b0Bounds_assemble(
        SCALING_F,
        SCALING_G,
        SCALING_SPHERE,
        radialGrid_make(SCALING_SPHERE, 256),
    )


def assert_covariant(theta: float, lam: float) -> None:
    """(theta F, lam G) moves every bound by theta^(2/2*) / lam"""
    base = scaling_base()
    scaled = b0Bounds_assemble(
        potential_scale(theta, SCALING_F),
        spatialPotential_scale(lam, SCALING_G),
        SCALING_SPHERE,
        radialGrid_make(SCALING_SPHERE, 256),
    )
    lift = theta**0.5
    assert scaled.A0_nF == pytest.approx(lift * base.A0_nF, rel=1e-9)
    assert base.threshold_sup is not None
    assert scaled.threshold_sup == pytest.approx(
        lift / lam * base.threshold_sup, rel=1e-9
    )
    pairs = list(zip(base.lower, scaled.lower, strict=True)) + list(
        zip(base.upper, scaled.upper, strict=True)
    )
    for before, after in pairs:
        assert after.provenance is before.provenance
        assert after.value == pytest.approx(
            lift / lam * before.value, rel=1e-9
        )
    if base.exact is not None:
        assert scaled.exact == pytest.approx(
            lift / lam * base.exact, rel=1e-9
        )


class TestEuclideanConstant:
    """A0(n) from the bubble quotient"""

    @pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
    def test_sphere_identity(self, n: int) -> None:
        """n(n-2)/4 A0(n) = omega_n^(-2/n)"""
        lhs = n * (n - 2) / 4.0 * a0Euclidean_compute(n)
        assert lhs == pytest.approx(
            unitSphere_volume(n) ** (-2.0 / n), rel=1e-6
        )

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
    def test_closed_form(self, n: int) -> None:
        """A0(n) = 4 / (n (n-2)) omega_n^(-2/n), omega_n from Gamma"""
        omega = 2.0 * np.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)
        value = a0Euclidean_compute(n)
        assert np.isfinite(value)
        assert value == pytest.approx(
            4.0 / (n * (n - 2)) * omega ** (-2.0 / n), rel=1e-6
        )

    def test_three_dimensions(self) -> None:
        """A0(3) = 4 / (3 omega_3^(2/3))"""
        expected = 4.0 / (3.0 * unitSphere_volume(3) ** (2.0 / 3.0))
        assert a0Euclidean_compute(3) == pytest.approx(expected, rel=1e-6)

    def test_bubble_rescaling(self) -> None:
        """The quotient does not see a * w(b x)"""
        base = a0Euclidean_compute(5)
        assert a0Euclidean_compute(
            5, amplitude=3.0, scale=0.5
        ) == pytest.approx(base, rel=1e-12)

    def test_tail_not_converged(self) -> None:
        with pytest.raises(TailNotConverged):
            a0Euclidean_compute(4, r_cut=1.001)

    def test_low_dimension(self) -> None:
        with pytest.raises(ValueError, match=">= 3"):
            a0Euclidean_compute(2)

    def test_zero_bubble(self) -> None:
        with pytest.raises(ValueError, match="nonzero"):
            a0Euclidean_compute(4, amplitude=0.0)


class TestVectorConstant:
    """A0(n, F) = M_F^(2/2*) A0(n)"""

    def test_euclidean_norm(self) -> None:
        F = lqPotential_make(2.0, 4.0, 3)
        assert a0Vector_compute(4, F) == pytest.approx(a0Euclidean_compute(4))

    def test_l1_lift(self) -> None:
        """M_F = 4 for |t|_1^4, so the lift is 2"""
        F = lqPotential_make(1.0, 4.0, 2)
        assert a0Vector_compute(4, F) == pytest.approx(
            2.0 * a0Euclidean_compute(4), rel=1e-12
        )

    def test_wrong_degree(self) -> None:
        F = lqPotential_make(2.0, 3.0, 2)
        with pytest.raises(ValueError, match="degree"):
            a0Vector_compute(4, F)


class TestBoundTable:
    """Provenance-tagged bounds on B0(n, F, G, g)"""

    def test_round_sphere_pinch(self) -> None:
        """|t|_1^4 with G = |t|^2 pinches at 2 omega_4^(-1/2)"""
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
        report = b0Bounds_assemble(
            lqPotential_make(1.0, 4.0, 2), norm_G(2), M, radialGrid_make(M)
        )
        expected = 2.0 * unitSphere_volume(4) ** -0.5
        assert report.exact == pytest.approx(expected, rel=1e-10)
        assert "pinch" in report.exact_reason
        lower = report.bound(BoundProvenance.DES1_LOWER)
        assert lower is not None
        assert lower.value == pytest.approx(expected, rel=1e-10)
        assert not report.inconsistent

    def test_no_pinch_for_varying_slices(self) -> None:
        """diag(2, 1) against maximizers +-e1 leaves a gap"""
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 5)
        F = coordinatePowerPotential_make([1.0, 0.5], critical(5))
        G = absBilinearPotential_make([[2.0, 0.0], [0.0, 1.0]])
        report = b0Bounds_assemble(F, G, M, radialGrid_make(M, 512))
        assert report.exact is None
        assert report.max_lower < report.min_upper
        assert report.m_G == pytest.approx(1.0)

    def test_scalar_sphere_constant(self) -> None:
        assert b0ScalarSphere_compute(4) == pytest.approx(
            unitSphere_volume(4) ** -0.5, rel=1e-12
        )

    def test_torus_lower_bounds_only(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 4)
        report = b0Bounds_assemble(
            lqPotential_make(2.0, 4.0, 2), norm_G(2), M, radialGrid_make(M)
        )
        assert report.upper == ()
        assert report.B0_scalar is None
        assert any("lower bounds only" in w for w in report.warnings)
        trivial = report.bound(BoundProvenance.TRIVIAL)
        assert trivial is not None
        assert trivial.value == pytest.approx(1.0)

    def test_torus_required_scalar(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 4)
        with pytest.raises(UnknownScalarB0):
            b0Bounds_assemble(
                lqPotential_make(2.0, 4.0, 1),
                norm_G(1),
                M,
                require_scalar_b0=True,
            )

    def test_three_dimensions_skip_geometric(self) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 3)
        report = b0Bounds_assemble(
            lqPotential_make(2.0, 6.0, 1), norm_G(1), M, radialGrid_make(M)
        )
        assert report.threshold_sup is None
        assert report.bound(BoundProvenance.GEOMETRIC) is None
        assert any("n=3" in w for w in report.warnings)

    def test_euclidean_rejected(self) -> None:
        M = ModelManifold(ManifoldKind.EUCLIDEAN_BALL, 4)
        with pytest.raises(ValueError, match="closed"):
            b0Bounds_assemble(lqPotential_make(2.0, 4.0, 1), norm_G(1), M)

    @given(
        st.floats(min_value=0.2, max_value=1.0),
        st.floats(min_value=0.5, max_value=3.0),
        st.floats(min_value=0.5, max_value=3.0),
    )
    @settings(max_examples=25, deadline=None)
    @pytest.mark.slow
    def test_lower_below_upper(
        self, weight: float, first: float, second: float
    ) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 5)
        F = coordinatePowerPotential_make([1.0, weight], critical(5))
        G = absBilinearPotential_make([[first, 0.0], [0.0, second]])
        report = b0Bounds_assemble(F, G, M, radialGrid_make(M, 256))
        assert not report.inconsistent
        assert report.max_lower <= report.min_upper * (1.0 + 1e-9)

    def test_reference_models(self) -> None:
        omega = unitSphere_volume(4) ** 0.5
        assert referenceUpperBound_lookup(4, "S1xSn-1") == pytest.approx(
            5.0 / (8.0 * omega)
        )
        assert referenceUpperBound_lookup(
            4, "ProjectiveSpace"
        ) == pytest.approx(3.0 / omega)


class TestScaling:
    """Bounds under F -> theta F and G -> lam G"""

    @pytest.mark.parametrize(
        ("theta", "lam"), [(2.0, 0.5), (0.1, 10.0), (7.0, 3.0)]
    )
    def test_fixed_factors(self, theta: float, lam: float) -> None:
        assert_covariant(theta, lam)

    @given(
        st.floats(min_value=0.1, max_value=10.0),
        st.floats(min_value=0.1, max_value=10.0),
    )
    @settings(max_examples=25, deadline=None)
    @pytest.mark.slow
    def test_any_factors(self, theta: float, lam: float) -> None:
        assert_covariant(theta, lam)


class TestDichotomy:
    """Verdict of the bound interval against the geometric threshold"""

    def test_round_sphere_touches(self) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 5)
        F = lqPotential_make(2.0, critical(5), 2)
        G = norm_G(2)
        grid = radialGrid_make(M)
        report = b0Bounds_assemble(F, G, M, grid)
        verdict = dichotomy_classify(report, F, G, M, 1e-4, grid)
        assert verdict.verdict is Verdict.TOUCHES_WITHIN
        assert verdict.threshold_sup == pytest.approx(
            unitSphere_volume(5) ** (-2.0 / 5.0), rel=1e-6
        )
        assert verdict.warnings == ()

    def test_flat_torus_strictly_above(self) -> None:
        M = ModelManifold(ManifoldKind.FLAT_TORUS, 5)
        F = lqPotential_make(2.0, critical(5), 2)
        G = norm_G(2)
        grid = radialGrid_make(M, 256)
        report = b0Bounds_assemble(F, G, M, grid)
        verdict = dichotomy_classify(report, F, G, M, grid=grid)
        assert verdict.threshold_sup == 0.0
        assert verdict.verdict is Verdict.STRICTLY_ABOVE

    @pytest.mark.parametrize("name", ["threshold_sup", "exact"])
    def test_nan_entries(self, name: str) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 5)
        F = lqPotential_make(2.0, critical(5), 2)
        G = norm_G(2)
        grid = radialGrid_make(M, 256)
        report = replace(
            b0Bounds_assemble(F, G, M, grid), **{name: float("nan")}
        )
        with pytest.raises(NonFiniteConstant, match="nan"):
            dichotomy_classify(report, F, G, M, grid=grid)

    def test_small_dimension_warning(self) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
        F = lqPotential_make(2.0, 4.0, 1)
        G = norm_G(1)
        report = b0Bounds_assemble(F, G, M)
        verdict = dichotomy_classify(report, F, G, M)
        assert any("indicative" in w for w in verdict.warnings)

    def test_local_threshold(self) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 6)
        F = lqPotential_make(2.0, critical(6), 1)
        G = norm_G(1)
        value = geometricThreshold_compute(F, G, M, 0.7)
        assert value == pytest.approx(
            unitSphere_volume(6) ** (-1.0 / 3.0), rel=1e-6
        )
        assert bEpsilon_compute(F, G, M, 0.7, 0.25) == pytest.approx(
            value + 0.25
        )


class TestContinuity:
    """Bounds move continuously with F and G"""

    def test_zero_amplitude(self) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
        move = bounds_continuityCheck(
            lqPotential_make(1.0, 4.0, 2),
            norm_G(2),
            M,
            0.0,
            np.random.default_rng(1),
            radialGrid_make(M, 256),
        )
        assert move == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("amplitude", [1e-4, 1e-3, 1e-2])
    def test_small_perturbation(self, amplitude: float) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
        move = bounds_continuityCheck(
            coordinatePowerPotential_make([1.0, 0.5], 4.0),
            absBilinearPotential_make([[2.0, 0.0], [0.0, 1.0]]),
            M,
            amplitude,
            np.random.default_rng(7),
            radialGrid_make(M, 256),
        )
        assert move <= 5.0 * amplitude

    def test_amplitude_range(self) -> None:
        M = ModelManifold(ManifoldKind.ROUND_SPHERE, 4)
        with pytest.raises(ValueError, match="amplitude"):
            bounds_continuityCheck(
                lqPotential_make(2.0, 4.0, 1),
                norm_G(1),
                M,
                1.0,
                np.random.default_rng(0),
            )
