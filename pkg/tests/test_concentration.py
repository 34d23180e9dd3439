"""
Concentration diagnostics tests

Sphere extremals with beta -> 1 concentrate all of their mass at the
pole, which fixes the atoms: nu_1 = 1 and A0(n) mu_1 = 1.
"""

import numpy as np
import pytest

from sobolevlab.lib.concentration import (
    ExtrapolationUnstable,
    SupNotAtPole,
    concentrationScale_compute,
    decayEnvelope_fit,
    dgnmRatio_compute,
    l2TailRatio_compute,
    massProfile_tabulate,
    rescale_extract,
    reverseHolder_check,
)
from sobolevlab.lib.constants import NonFiniteConstant
from sobolevlab.lib.extremals import ZeroField, sphereExtremalFamily_make
from sobolevlab.lib.fields import field_constant, field_fromProfile
from sobolevlab.lib.manifolds import ballIntegral_compute, radialGrid_make
from sobolevlab.models.geometry import ManifoldKind, ModelManifold, RadialGrid


def sphere_grid(n: int, N: int = 4096) -> RadialGrid:
    return radialGrid_make(ModelManifold(ManifoldKind.ROUND_SPHERE, n), N)


class TestScales:
    """Concentration scale and ball masses"""

    def test_constant_scale(self) -> None:
        """2*/n = 1 in dimension 4"""
        U = field_constant(sphere_grid(4, 64), 4.0, [1.0])
        assert concentrationScale_compute(U) == pytest.approx(0.25)

    def test_zero_scale(self) -> None:
        U = field_constant(sphere_grid(4, 64), 0.0, [1.0])
        with pytest.raises(ZeroField):
            concentrationScale_compute(U)

    def test_mass_profile_monotone(self) -> None:
        grid = sphere_grid(4, 512)
        U = field_fromProfile(grid, 2.0 + np.cos(grid.r), [0.6, 0.8])
        rows = massProfile_tabulate(U, [0.8, 0.2, 0.4])
        assert [row.delta for row in rows] == [0.2, 0.4, 0.8]
        for a, b in zip(rows, rows[1:]):
            assert a.f_mass < b.f_mass
            assert a.dirichlet_mass < b.dirichlet_mass
            assert a.l2_mass < b.l2_mass

    def test_ladder_range(self) -> None:
        U = field_constant(sphere_grid(4, 64), 1.0, [1.0])
        with pytest.raises(ValueError, match="outside"):
            massProfile_tabulate(U, [4.0])

    def test_l2_tail(self) -> None:
        grid = sphere_grid(4, 512)
        U = field_constant(grid, 1.0, [1.0])
        inside = ballIntegral_compute(np.ones(513), grid, 1.0)
        expected = 1.0 - inside / float(grid.quadrature.sum())
        assert l2TailRatio_compute(U, 1.0) == pytest.approx(expected)
        assert l2TailRatio_compute(U, 0.0) == pytest.approx(1.0)


class TestAtoms:
    """Atom extrapolation along a family"""

    def test_sphere_extremals_saturate(self) -> None:
        """n = 5 sweep down to beta = 1.001"""
        betas = [1.01, 1.005, 1.003, 1.002, 1.001]
        family = sphereExtremalFamily_make(5, betas, sphere_grid(5))
        report = reverseHolder_check(family)
        assert report.concentrating
        assert report.admissible_deltas
        mus = [member.mu for member in report.members]
        assert np.all(np.diff(mus) < 0.0)
        assert 0.95 <= report.nu1 <= 1.0 + 1e-6
        assert report.margin >= -0.02
        assert np.isfinite(report.margin)
        assert report.warnings == ()

    @pytest.mark.parametrize("a0nF", [float("nan"), float("inf"), -1.0])
    def test_bad_first_constant(self, a0nF: float) -> None:
        family = sphereExtremalFamily_make(5, [1.1, 1.05], sphere_grid(5, 512))
        with pytest.raises(NonFiniteConstant, match="A0"):
            reverseHolder_check(family, a0nF=a0nF)

    def test_flat_family(self) -> None:
        family = sphereExtremalFamily_make(5, [3.0, 2.5], sphere_grid(5, 512))
        report = reverseHolder_check(family)
        assert not report.concentrating
        assert report.nu1 == 0.0 and report.mu1 == 0.0
        assert any("does not concentrate" in w for w in report.warnings)

    def test_single_member(self) -> None:
        family = sphereExtremalFamily_make(5, [1.01], sphere_grid(5, 512))
        with pytest.raises(ExtrapolationUnstable, match="two members"):
            reverseHolder_check(family)

    def test_tail_rows_per_radius(self) -> None:
        family = sphereExtremalFamily_make(4, [2.0, 1.5], sphere_grid(4, 512))
        report = reverseHolder_check(family, deltas=[0.1, 0.5])
        for member in report.members:
            assert len(member.rows) == 2
            assert len(member.l2_tail) == 2
            assert member.l2_tail[0] > member.l2_tail[1]


class TestDgnm:
    """Sup-to-mean ratio about the pole"""

    def test_constant_field(self) -> None:
        grid = sphere_grid(4, 512)
        U = field_constant(grid, 3.0, [1.0])
        result = dgnmRatio_compute(U, 0.5, 2.0)
        volume = ballIntegral_compute(np.ones(513), grid, 1.0)
        assert result.ratio == pytest.approx(0.25 / np.sqrt(volume))

    def test_radius_range(self) -> None:
        U = field_constant(sphere_grid(4, 64), 1.0, [1.0])
        with pytest.raises(ValueError, match="exceeds"):
            dgnmRatio_compute(U, 2.0, 2.0)

    def test_exponent(self) -> None:
        U = field_constant(sphere_grid(4, 64), 1.0, [1.0])
        with pytest.raises(ValueError, match="positive"):
            dgnmRatio_compute(U, 0.5, 0.0)


class TestRescale:
    """Blow-up profiles and their decay"""

    def test_unit_at_origin(self) -> None:
        family = sphereExtremalFamily_make(4, [1.01], sphere_grid(4, 2048))
        rescaled = rescale_extract(family.fields[0])
        assert rescaled.field.norm[0] == pytest.approx(1.0, rel=1e-9)
        assert rescaled.field.grid.manifold.kind is ManifoldKind.EUCLIDEAN_BALL
        assert rescaled.mu > 0.0

    def test_matches_unit_bubble(self) -> None:
        """beta = 1.01, n = 5: V is the unit bubble on rho <= 5 within 2%"""
        family = sphereExtremalFamily_make(5, [1.01], sphere_grid(5))
        rescaled = rescale_extract(family.fields[0])
        grid = rescaled.field.grid
        near = grid.r <= 5.0
        bubble = (1.0 + grid.r[near] ** 2) ** (-1.5)
        gap = np.abs(rescaled.field.norm[near] - bubble).max()
        assert gap <= 0.02

    def test_envelope_stable_along_family(self) -> None:
        family = sphereExtremalFamily_make(5, [1.01, 1.005], sphere_grid(5))
        envelopes = [
            decayEnvelope_fit(rescale_extract(U).field) for U in family.fields
        ]
        assert envelopes[1] == pytest.approx(envelopes[0], rel=0.2)

    def test_sup_off_pole(self) -> None:
        grid = sphere_grid(4, 256)
        U = field_fromProfile(grid, 1.0 - np.cos(grid.r), [1.0])
        with pytest.raises(SupNotAtPole):
            rescale_extract(U)

    def test_bubble_envelope(self) -> None:
        M = ModelManifold(ManifoldKind.EUCLIDEAN_BALL, 4, radius=20.0)
        grid = radialGrid_make(M, 1024)
        V = field_fromProfile(grid, 1.0 / (1.0 + grid.r**2), [1.0])
        C = decayEnvelope_fit(V)
        assert 0.7 < C < 1.0

    def test_empty_window(self) -> None:
        M = ModelManifold(ManifoldKind.EUCLIDEAN_BALL, 4, radius=1.0)
        V = field_constant(radialGrid_make(M, 64), 1.0, [1.0])
        with pytest.raises(ValueError, match="no grid node"):
            decayEnvelope_fit(V)
