"""
Concentration diagnostics for families of fields

Every member is reduced to ball masses over a ladder of radii about the
pole. For a family concentrating at the pole with scale mu = sup^(-2*/n),
the mass inside a fixed ball approaches its limit like mu^n (F-mass) and
mu^(n-2) (Dirichlet energy). The atoms nu_1 and mu_1 are estimated by a
two-point Richardson step in mu on the two most concentrated members,
followed by a second step delta -> 0 of order n over the two smallest
radii that are large against the concentration scale.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from ..config import appsettings
from ..models.concentration import (
    ConcentrationReport,
    DgnmResult,
    FieldFamily,
    MassRow,
    MemberDiagnostics,
    RescaledProfile,
)
from ..models.geometry import (
    ManifoldKind,
    MassIntegrand,
    ModelManifold,
    RadialGrid,
    VectorRadialField,
)
from ..models.potentials import FloatArray, HomogeneousPotential
from .constants import (
    NonFiniteConstant,
    a0Euclidean_compute,
    a0Vector_compute,
)
from .extremals import ZeroField
from .fields import fieldL2_compute, fieldMass_compute, fieldSup_compute
from .log import LOG, warning_emit
from .manifolds import (
    ballIntegral_compute,
    ballMass_compute,
    gradientDirichlet_compute,
    radialGrid_make,
)
from .potentials import potential_evaluate


class ExtrapolationUnstable(ValueError):
    """Raised when the atom extrapolation has no trustworthy input."""


class SupNotAtPole(ValueError):
    """Raised when a field does not peak at the pole."""


CONCENTRATION_RATIO: float = 1.5
CORRECTION_LIMIT: float = 0.5
SUP_SLACK: float = 1.0e-9
RESCALE_WINDOW: float = 10.0
RESCALE_GRID: int = 1024


def _ladder(grid: RadialGrid, deltas: Sequence[float] | None) -> list[float]:
    values = list(appsettings.delta_ladder if deltas is None else deltas)
    for delta in values:
        if not 0.0 < delta <= grid.r_max:
            raise ValueError(f"ball radius {delta} outside (0, {grid.r_max}]")
    return sorted(values)


def concentrationScale_compute(U: VectorRadialField) -> float:
    """mu = sup |U|^(-2*/n)."""
    sup = fieldSup_compute(U)
    if sup == 0.0:
        raise ZeroField("the zero field has no concentration scale")
    return float(sup ** (-U.grid.manifold.critical_exponent / U.grid.n))


def massProfile_tabulate(
    U: VectorRadialField,
    deltas: Sequence[float] | None = None,
    F: HomogeneousPotential | None = None,
) -> list[MassRow]:
    """
    F-mass, Dirichlet energy and L2 mass of U inside B(pole, delta).

    Args:
        U: Field.
        deltas: Ball radii in (0, r_max]; the configured ladder by default.
        F: Potential of the F-mass; |t|^(2*) when omitted.
    """
    rows = [
        MassRow(
            delta=delta,
            f_mass=ballMass_compute(U, delta, MassIntegrand.F_MASS, F),
            dirichlet_mass=ballMass_compute(U, delta, MassIntegrand.DIRICHLET),
            l2_mass=ballMass_compute(U, delta, MassIntegrand.L2),
        )
        for delta in _ladder(U.grid, deltas)
    ]
    return rows


def l2TailRatio_compute(U: VectorRadialField, delta: float) -> float:
    """
    Fraction of the L2 mass of U outside B(pole, delta).

    Raises:
        ZeroField: If U vanishes identically.
    """
    if not 0.0 <= delta < U.grid.r_max:
        raise ValueError(f"ball radius {delta} outside [0, {U.grid.r_max})")
    total = fieldL2_compute(U)
    if total == 0.0:
        raise ZeroField("L2 tail ratio of the zero field")
    inside = ballMass_compute(U, delta, MassIntegrand.L2)
    return float(max(total - inside, 0.0) / total)


def _member(
    parameter: float,
    U: VectorRadialField,
    deltas: list[float],
    F: HomogeneousPotential | None,
) -> MemberDiagnostics:
    rows = massProfile_tabulate(U, deltas, F)
    tails = tuple(
        l2TailRatio_compute(U, delta) if delta < U.grid.r_max else 0.0
        for delta in deltas
    )
    return MemberDiagnostics(
        parameter=float(parameter),
        sup=fieldSup_compute(U),
        mu=concentrationScale_compute(U),
        rows=tuple(rows),
        f_total=fieldMass_compute(U, F),
        dirichlet_total=gradientDirichlet_compute(U),
        l2_tail=tails,
    )


def _richardson(
    coarse: float, fine: float, h_coarse: float, h_fine: float, order: float
) -> float:
    # value at h -> 0 from two samples of value(h) = limit + c h^order
    a, b = h_fine**order, h_coarse**order
    return (fine * b - coarse * a) / (b - a)


def _atom(
    pairs: list[tuple[float, float, float]],
    mu_coarse: float,
    mu_fine: float,
    mu_order: float,
    n: int,
    total: float,
) -> float:
    """
    Iterated limit over (delta, coarse mass, fine mass) rows, smallest
    delta first.
    """
    limits: list[float] = []
    for delta, coarse, fine in pairs[:2]:
        value = _richardson(coarse, fine, mu_coarse, mu_fine, mu_order)
        if abs(value - fine) > CORRECTION_LIMIT * max(total, 1e-300):
            raise ExtrapolationUnstable(
                f"scale extrapolation at delta={delta:g} moves the mass by "
                f"{abs(value - fine):.3e}"
            )
        limits.append(value)
    if len(limits) == 1:
        return limits[0]
    (d_small, _, _), (d_large, _, _) = pairs[0], pairs[1]
    value = _richardson(limits[1], limits[0], d_large, d_small, float(n))
    if abs(value - limits[0]) > CORRECTION_LIMIT * max(total, 1e-300):
        raise ExtrapolationUnstable(
            "radius extrapolation moves the mass by "
            f"{abs(value - limits[0]):.3e}"
        )
    return value


def reverseHolder_check(
    family: FieldFamily,
    F: HomogeneousPotential | None = None,
    a0nF: float | None = None,
    deltas: Sequence[float] | None = None,
) -> ConcentrationReport:
    """
    Estimate the atoms (nu_1, mu_1) of a family and the margin
    A0(n,F) mu_1 - nu_1^(2/2*).

    A family whose sup grows by less than a factor 1.5 is reported as
    non-concentrating with zero atoms.

    Args:
        family: Field family on one grid.
        F: Potential of the F-mass; |t|^(2*) when omitted.
        a0nF: First best constant; computed from F when omitted.
        deltas: Ball radii; the configured ladder by default.

    Raises:
        ExtrapolationUnstable: With fewer than two members, without a
            radius large against the concentration scale, or when a
            correction exceeds half the total mass.
        NonFiniteConstant: If A0(n,F) is not a positive finite number.
    """
    grid = family.fields[0].grid
    n = grid.n
    two_star = grid.manifold.critical_exponent
    ladder = _ladder(grid, deltas)
    warnings: list[str] = []
    if a0nF is None:
        a0nF = a0Euclidean_compute(n) if F is None else a0Vector_compute(n, F)
    if not (np.isfinite(a0nF) and a0nF > 0.0):
        raise NonFiniteConstant(f"A0(n,F)={a0nF} is not a positive number")

    members = tuple(
        _member(p, U, ladder, F)
        for p, U in zip(family.parameters, family.fields, strict=True)
    )
    if len(members) < 2:
        raise ExtrapolationUnstable("atom extrapolation needs two members")
    ranked = sorted(members, key=lambda m: m.sup)
    if ranked[-1].sup < CONCENTRATION_RATIO * ranked[0].sup:
        warning_emit("family does not concentrate: atoms set to 0", warnings)
        return ConcentrationReport(
            members=members,
            deltas=tuple(ladder),
            admissible_deltas=(),
            nu1=0.0,
            mu1=0.0,
            margin=0.0,
            concentrating=False,
            warnings=tuple(warnings),
        )

    fine, coarse = ranked[-1], ranked[-2]
    floor = appsettings.asymptotic_ratio * fine.mu
    admissible = [i for i, delta in enumerate(ladder) if delta >= floor]
    if not admissible:
        raise ExtrapolationUnstable(
            f"no ball radius reaches {floor:.3g} = "
            f"{appsettings.asymptotic_ratio:g} * mu"
        )
    f_pairs = [
        (ladder[i], coarse.rows[i].f_mass, fine.rows[i].f_mass)
        for i in admissible
    ]
    d_pairs = [
        (ladder[i], coarse.rows[i].dirichlet_mass, fine.rows[i].dirichlet_mass)
        for i in admissible
    ]
    nu1 = _atom(f_pairs, coarse.mu, fine.mu, float(n), n, fine.f_total)
    mu1 = _atom(
        d_pairs, coarse.mu, fine.mu, float(n - 2), n, fine.dirichlet_total
    )
    if not (np.isfinite(nu1) and np.isfinite(mu1)):
        raise ExtrapolationUnstable(
            f"atom extrapolation gave nu1={nu1}, mu1={mu1}"
        )
    nu1 = float(np.clip(nu1, 0.0, fine.f_total))
    mu1 = max(float(mu1), 0.0)
    margin = a0nF * mu1 - nu1 ** (2.0 / two_star)
    LOG(
        f"atoms: nu1={nu1:.12g} mu1={mu1:.12g} margin={margin:.6g} "
        f"({len(admissible)} admissible radii)",
        2,
    )
    return ConcentrationReport(
        members=members,
        deltas=tuple(ladder),
        admissible_deltas=tuple(ladder[i] for i in admissible),
        nu1=nu1,
        mu1=mu1,
        margin=float(margin),
        concentrating=True,
        warnings=tuple(warnings),
    )


def dgnmRatio_compute(
    U: VectorRadialField,
    delta: float,
    p: float,
    q: float | None = None,
    F: HomogeneousPotential | None = None,
) -> DgnmResult:
    """
    Sup-to-mean ratio of U about the pole:

        sup_{B(delta)} |U| / (delta^(-n/p) ||U||_{L^p(B(2 delta))})

    Args:
        U: Field.
        delta: Inner radius; 2 delta must fit in the grid.
        p: Exponent of the mean. When F is given and p equals its degree,
            int F(U) replaces int |U|^p.
        q: Exponent of the reported gate norm ||U||_{L^q(B(2 delta))};
            2 * 2* by default.
        F: Optional potential for the mean.
    """
    grid = U.grid
    if delta <= 0.0 or 2.0 * delta > grid.r_max:
        raise ValueError(f"2*delta={2 * delta} exceeds r_max={grid.r_max}")
    if p <= 0.0:
        raise ValueError("exponent p must be positive")
    exponent = 2.0 * grid.manifold.critical_exponent if q is None else q
    norm = U.norm
    if F is not None and abs(F.degree - p) < 1e-12:
        density = np.asarray(potential_evaluate(F, U.values))
    else:
        density = norm**p
    mean = ballIntegral_compute(density, grid, 2.0 * delta) ** (1.0 / p)
    gate = ballIntegral_compute(norm**exponent, grid, 2.0 * delta) ** (
        1.0 / exponent
    )
    sup = float(norm[grid.distance <= delta].max())
    if mean == 0.0:
        raise ZeroField("field vanishes on the doubled ball")
    ratio = sup / (delta ** (-grid.n / p) * mean)
    return DgnmResult(ratio=float(ratio), lq_norm=float(gate))


def rescale_extract(
    U: VectorRadialField,
    window: float = RESCALE_WINDOW,
    N: int = RESCALE_GRID,
) -> RescaledProfile:
    """
    Blow-up profile V(y) = mu^(n/2*) U(mu y) about the pole.

    V is resampled with a cubic spline onto a Euclidean radial grid of
    radius `window`; radii mu y beyond the source grid use the value at
    its outermost node. |V(0)| = 1 by construction.

    Raises:
        SupNotAtPole: If |U| is not maximal at the pole.
    """
    grid = U.grid
    norm = U.norm
    sup = float(norm.max())
    if sup == 0.0:
        raise ZeroField("cannot rescale the zero field")
    if norm[0] < sup * (1.0 - SUP_SLACK):
        raise SupNotAtPole(
            f"|U| at the pole is {norm[0]:.6g}, below the sup {sup:.6g}"
        )
    n = grid.n
    two_star = grid.manifold.critical_exponent
    mu = sup ** (-two_star / n)
    target = radialGrid_make(
        ModelManifold(ManifoldKind.EUCLIDEAN_BALL, n, radius=window), N
    )
    # radial branch of the source grid, r increasing from the pole
    branch = np.flatnonzero(grid.r <= grid.r_max)
    radii = grid.r[branch]
    spline = CubicSpline(radii, U.values[branch], axis=0)
    query = np.clip(mu * target.r, 0.0, float(radii[-1]))
    values = mu ** (n / two_star) * np.asarray(spline(query))
    LOG(f"rescale: mu={mu:.6g} window={window:g}", 3)
    return RescaledProfile(
        mu=float(mu), field=VectorRadialField(grid=target, values=values)
    )


def decayEnvelope_fit(
    V: VectorRadialField,
    s: float = 0.1,
    rho_range: tuple[float, float] = (2.0, 10.0),
) -> float:
    """C = max |V(rho)| rho^(n-2-s) over the window rho_range."""
    grid = V.grid
    lo, hi = rho_range
    inside = (grid.distance >= lo) & (grid.distance <= hi)
    if not np.any(inside):
        raise ValueError(f"no grid node in rho range [{lo}, {hi}]")
    envelope: FloatArray = V.norm[inside] * grid.distance[inside] ** (
        grid.n - 2 - s
    )
    return float(envelope.max())
