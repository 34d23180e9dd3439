"""
Brezis-Lieb splitting tests

The pointwise splitting inequality with the computed constant C(eps), and
the integrated defect along families that converge to a limit.
"""

import numpy as np
import pytest

from sobolevlab.lib.brezis_lieb import (
    brezisLieb_constant,
    brezisLieb_defect,
    brezisLieb_modulus,
    brezisLieb_verify,
)
from sobolevlab.lib.fields import (
    field_constant,
    field_fromProfile,
    fieldMass_compute,
)
from sobolevlab.lib.manifolds import GridMismatch, radialGrid_make
from sobolevlab.lib.potentials import (
    coordinatePowerPotential_make,
    lqPotential_make,
)
from sobolevlab.models.geometry import ManifoldKind, ModelManifold, RadialGrid


def sphere_grid(n: int, N: int = 128) -> RadialGrid:
    return radialGrid_make(ModelManifold(ManifoldKind.ROUND_SPHERE, n), N)


class TestSplitting:
    """|F(s+t) - F(s)| <= eps |s|^p + C(eps) |t|^p"""

    @pytest.mark.parametrize("q", [1.0, 2.0])
    def test_no_violations(self, q: float) -> None:
        F = lqPotential_make(q, 4.0, 2)
        rng = np.random.default_rng(3)
        C = brezisLieb_constant(F, 0.5, rng)
        assert C > 0.0
        violations = brezisLieb_verify(
            F, 0.5, C, pairs=100_000, rng=np.random.default_rng(11)
        )
        assert violations == 0

    def test_modulus_shrinks_with_epsilon(self) -> None:
        F = coordinatePowerPotential_make([1.0, 0.5], 3.0)
        coarse = brezisLieb_modulus(F, 0.5)
        fine = brezisLieb_modulus(F, 0.05)
        assert 0.0 < fine < coarse < 1.0

    def test_bad_epsilon(self) -> None:
        F = lqPotential_make(2.0, 4.0, 2)
        with pytest.raises(ValueError, match="positive"):
            brezisLieb_modulus(F, 0.0)


class TestDefect:
    """int F(U_a) - int F(U_a - U) - int F(U) along a family"""

    def test_vanishes_on_limit(self) -> None:
        grid = sphere_grid(4)
        F = lqPotential_make(2.0, 4.0, 2)
        limit = field_fromProfile(grid, np.cos(grid.r), [0.6, 0.8])
        assert brezisLieb_defect(F, [limit], limit)[0] == pytest.approx(
            0.0, abs=1e-14
        )

    def test_doubled_field(self) -> None:
        """|2U|^4 - |U|^4 - |U|^4 = 14 |U|^4"""
        grid = sphere_grid(4)
        F = lqPotential_make(2.0, 4.0, 1)
        limit = field_fromProfile(grid, 1.0 + np.cos(grid.r), [1.0])
        doubled = limit.with_values(2.0 * limit.values)
        defect = brezisLieb_defect(F, [doubled], limit)[0]
        assert defect == pytest.approx(14.0 * fieldMass_compute(limit, F))

    def test_decays_along_perturbation(self) -> None:
        """U_a = U + W / a"""
        grid = sphere_grid(4)
        F = lqPotential_make(2.0, 4.0, 2)
        direction = [0.6, 0.8]
        limit = field_fromProfile(
            grid, 0.05 * (1.0 + np.cos(grid.r)), direction
        )
        W = field_fromProfile(grid, 0.05 * np.sin(grid.r) ** 2, direction)
        alphas = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
        family = [
            limit.with_values(limit.values + W.values / alpha)
            for alpha in alphas
        ]
        defects = brezisLieb_defect(F, family, limit)
        assert np.all(np.diff(defects[-5:]) < 0.0)
        assert np.all(np.diff(defects) <= 0.0)
        assert defects[-1] < 1e-4

    def test_grid_mismatch(self) -> None:
        F = lqPotential_make(2.0, 4.0, 1)
        limit = field_constant(sphere_grid(4, 64), 1.0, [1.0])
        other = field_constant(sphere_grid(4, 128), 1.0, [1.0])
        with pytest.raises(GridMismatch):
            brezisLieb_defect(F, [other], limit)
