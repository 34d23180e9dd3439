"""
Best constants, bound assembly and the dichotomy classifier

A0(n) is the Rayleigh quotient (int w^(2*))^(2/2*) / int |grad w|^2 of the
bubble w = (1 + r^2)^(-(n-2)/2). Both integrals are computed in the angle
variable r = tan(s), which turns them into smooth trigonometric
integrands on [0, arctan(R_cut)], plus convergent binomial tail series
beyond R_cut.

For the second constant B0(n, F, G, g) the bound table collects:

    des1-lower   M_F^(2/2*) B0(n,1,g) / max_x G(x, t0), best t0 in X_F
    des1-upper   M_F^(2/2*) B0(n,1,g) / m_G
    geometric    sup_{x,t0} (n-2)/(4(n-1)) A0(n,F) S_g(x) / G(x, t0), n >= 4
    trivial      (M_F vol)^(2/2*) / int G(x, t0) dv, best t0 in X_F

and the two slice bounds pinch when some t0 has max_x G(x, t0) = m_G.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import replace
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson
from scipy.special import binom

from ..config import appsettings
from ..models.constants import (
    BestConstantReport,
    BoundEntry,
    BoundProvenance,
    DichotomyVerdict,
    ReferenceModel,
    Verdict,
)
from ..models.geometry import ManifoldKind, ModelManifold, RadialGrid
from ..models.potentials import (
    DirectionValues,
    FloatArray,
    HomogeneousPotential,
    MaximizerSet,
    SpatialPotential,
)
from .log import LOG, warning_emit
from .manifolds import (
    radialGrid_make,
    scalarCurvature_at,
    scalarCurvature_profile,
    unitSphere_volume,
    volume_compute,
)
from .potentials import (
    directionSphere_maximize,
    globalMin_compute,
    mFG_compute,
    spatialPotential_directionTable,
)


class TailNotConverged(ValueError):
    """Raised when the bubble tail series does not converge far enough."""


class UnknownScalarB0(ValueError):
    """Raised when B0(n,1,g) is unknown for a manifold and one is required."""


class NonFiniteConstant(ValueError):
    """Raised when a constant or threshold evaluates to nan or inf."""


TAIL_TOLERANCE: float = 1.0e-8
INCONSISTENCY_SLACK: float = 1.0e-8
PINCH_SLACK: float = 1.0e-12
POINT_CHUNK: int = 1024


def criticalExponent_compute(n: int) -> float:
    return 2.0 * n / (n - 2)


def _binomialTail(
    n: int, offset: float, R: float, scale: float
) -> tuple[float, float]:
    """
    Sum_j binom(-n, j) R^(-(offset + 2j)) / (offset + 2j).

    binom(-n, j) is taken as (-1)^j binom(n+j-1, j); scipy returns nan for
    a negative integer first argument.

    `offset` is n for the mass tail and n-2 for the gradient tail. Returns
    the sum and the magnitude of the last term kept.
    """
    total = 0.0
    term = np.inf
    for j in range(400):
        power = offset + 2.0 * j
        coefficient = (-1.0) ** j * float(binom(n + j - 1, j))
        term = coefficient * R ** (-power) / power
        total += term
        if abs(term) <= 1e-18 * max(abs(scale), 1e-300):
            return total, abs(term)
    return total, abs(term)


def _bubbleIntegrals(
    n: int, grid_N: int, r_cut: float
) -> tuple[float, float, float]:
    """
    Radial integrals of the unit bubble without the sphere-area factor.

    Returns (int_0^inf r^(n-1) w^(2*) dr, int_0^inf r^(n-1) w'^2 dr,
    relative remainder of the tail series).
    """
    if r_cut <= 1.0:
        raise TailNotConverged(f"R_cut={r_cut} must exceed 1")
    intervals = grid_N + (grid_N % 2)
    s = np.linspace(0.0, float(np.arctan(r_cut)), intervals + 1)
    sin, cos = np.sin(s), np.cos(s)
    mass_core = float(simpson(sin ** (n - 1) * cos ** (n - 1), x=s))
    grad_core = float(
        simpson((n - 2) ** 2 * sin ** (n + 1) * cos ** (n - 3), x=s)
    )
    mass_tail, mass_rest = _binomialTail(n, float(n), r_cut, mass_core)
    grad_sum, grad_rest = _binomialTail(n, float(n - 2), r_cut, grad_core)
    grad_tail = (n - 2) ** 2 * grad_sum
    mass = mass_core + mass_tail
    grad = grad_core + grad_tail
    remainder = max(mass_rest / mass, (n - 2) ** 2 * grad_rest / grad)
    return mass, grad, remainder


@lru_cache(maxsize=64)
def _a0Cached(n: int, grid_N: int, r_cut: float, a: float, b: float) -> float:
    mass, grad, remainder = _bubbleIntegrals(n, grid_N, r_cut)
    if not (np.isfinite(mass) and np.isfinite(grad) and grad > 0.0):
        raise TailNotConverged(
            f"bubble integrals are not finite (mass={mass}, grad={grad})"
        )
    if remainder > TAIL_TOLERANCE:
        raise TailNotConverged(
            f"tail remainder {remainder:.3e} exceeds {TAIL_TOLERANCE:g}"
        )
    two_star = criticalExponent_compute(n)
    area = unitSphere_volume(n - 1)
    # a * w(b x): mass scales by a^(2*) b^(-n), energy by a^2 b^(2-n)
    mass_total = area * abs(a) ** two_star * abs(b) ** (-n) * mass
    grad_total = area * a * a * abs(b) ** (2 - n) * grad
    return float(mass_total ** (2.0 / two_star) / grad_total)


def a0Euclidean_compute(
    n: int,
    grid_N: int | None = None,
    r_cut: float | None = None,
    amplitude: float = 1.0,
    scale: float = 1.0,
) -> float:
    """
    Sharp Euclidean Sobolev constant A0(n) from the bubble quotient.

    Args:
        n: Dimension, >= 3.
        grid_N: Intervals of the angular quadrature.
        r_cut: Truncation radius of the quadrature.
        amplitude: Amplitude a of the bubble a * w(b x).
        scale: Scale b of the bubble a * w(b x).

    Raises:
        TailNotConverged: If the tail series remainder is too large.
    """
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    if amplitude == 0.0 or scale == 0.0:
        raise ValueError("bubble amplitude and scale must be nonzero")
    return _a0Cached(
        n,
        appsettings.grid_n if grid_N is None else grid_N,
        appsettings.a0_r_cut if r_cut is None else r_cut,
        float(amplitude),
        float(scale),
    )


def a0Vector_compute(
    n: int, F: HomogeneousPotential, X_F: MaximizerSet | None = None
) -> float:
    """A0(n, F) = M_F^(2/2*) A0(n)."""
    two_star = criticalExponent_compute(n)
    if abs(F.degree - two_star) > 1e-12:
        raise ValueError(f"F has degree {F.degree}, expected {two_star}")
    maxima = X_F if X_F is not None else directionSphere_maximize(F)
    return float(maxima.M_F ** (2.0 / two_star) * a0Euclidean_compute(n))


def b0ScalarSphere_compute(n: int, grid_N: int | None = None) -> float:
    """B0(n, 1, round sphere) = omega_n^(-2/n), omega_n by quadrature."""
    volume = volume_compute(
        ModelManifold(ManifoldKind.ROUND_SPHERE, n), grid_N
    )
    return float(volume ** (-2.0 / n))


def referenceUpperBound_lookup(n: int, model: ReferenceModel | str) -> float:
    """
    Known upper bounds of B0(n, 1, g) for two literature models.

    S1 x S^(n-1):      (1 + (n-2)^2) / (n (n-2) omega_n^(2/n))
    projective space:  (n+2) / ((n-2) omega_n^(2/n))
    """
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    omega = unitSphere_volume(n) ** (2.0 / n)
    if ReferenceModel(model) is ReferenceModel.PRODUCT_CIRCLE_SPHERE:
        return float((1 + (n - 2) ** 2) / (n * (n - 2) * omega))
    return float((n + 2) / ((n - 2) * omega))


def _geometricFactor(n: int) -> float:
    return (n - 2) / (4.0 * (n - 1))


def _pointChunks(points: FloatArray) -> Iterator[FloatArray]:
    for start in range(0, points.shape[0], POINT_CHUNK):
        yield points[start : start + POINT_CHUNK]


def _sliceStatistics(
    G: SpatialPotential,
    grid: RadialGrid,
    points: FloatArray,
    curvature: FloatArray,
) -> tuple[FloatArray, FloatArray, float]:
    """
    Per maximizer t0: max_x G(x,t0) and int G(x,t0) dv; and the overall
    sup of S(x) / G(x, t0).
    """
    g_max: list[FloatArray] = []
    g_int: list[FloatArray] = []
    ratio = -np.inf
    for chunk in _pointChunks(points):
        table = spatialPotential_directionTable(G, grid.r, chunk)
        g_max.append(table.max(axis=0))
        g_int.append(grid.quadrature @ table)
        ratio = max(ratio, float((curvature[:, None] / table).max()))
    return np.concatenate(g_max), np.concatenate(g_int), ratio


def scalarB0_lookup(
    M: ModelManifold,
    grid: RadialGrid,
    conformal_exact: bool,
    warnings: list[str],
) -> float | None:
    """B0(n, 1, g) where known, else None."""
    n = M.n
    if M.kind is ManifoldKind.ROUND_SPHERE:
        return float(grid.quadrature.sum() ** (-2.0 / n))
    if M.kind is ManifoldKind.CONFORMAL_SPHERE and conformal_exact:
        if n < 4:
            warning_emit(
                "conformal-exact mode needs n >= 4; B0(n,1,g) left unknown",
                warnings,
            )
            return None
        warning_emit(
            "conformal-exact mode: B0(n,1,g) taken as "
            "(n-2)/(4(n-1)) A0(n) max S_g",
            warnings,
        )
        curvature = scalarCurvature_profile(grid)
        return float(
            _geometricFactor(n) * a0Euclidean_compute(n) * curvature.max()
        )
    return None


def b0Bounds_assemble(
    F: HomogeneousPotential,
    G: SpatialPotential,
    M: ModelManifold,
    grid: RadialGrid | None = None,
    conformal_exact: bool = False,
    require_scalar_b0: bool = False,
    X_F: MaximizerSet | None = None,
) -> BestConstantReport:
    """
    Assemble every certified bound on B0(n, F, G, g).

    Args:
        F: Degree-2* potential.
        G: Degree-2 spatial potential.
        M: Model manifold (not a Euclidean ball).
        grid: Grid of M; built with default resolution when omitted.
        conformal_exact: Treat the conformal-class formula as the exact
            scalar B0 on conformal spheres.
        require_scalar_b0: Raise instead of reporting lower bounds only.
        X_F: Precomputed maximizer set of F.

    Returns:
        BestConstantReport with provenance-tagged bounds.

    Raises:
        UnknownScalarB0: If B0(n,1,g) is unknown and required.
    """
    if M.kind is ManifoldKind.EUCLIDEAN_BALL:
        raise ValueError("second best constants need a closed manifold")
    n = M.n
    two_star = M.critical_exponent
    mesh = grid if grid is not None else radialGrid_make(M)
    warnings: list[str] = []
    maxima = X_F if X_F is not None else directionSphere_maximize(F)
    M_F = maxima.M_F
    lift = M_F ** (2.0 / two_star)
    A0_n = a0Euclidean_compute(n)
    A0_nF = lift * A0_n
    volume = float(mesh.quadrature.sum())
    curvature = scalarCurvature_profile(mesh)
    m_G = globalMin_compute(G, mesh.r)
    if m_G <= 0.0:
        raise ValueError(f"G is not positive (min {m_G:.6g})")
    g_max, g_int, ratio = _sliceStatistics(G, mesh, maxima.points, curvature)
    LOG(f"bounds: M_F={M_F:.12g} m_G={m_G:.12g} vol={volume:.12g}", 2)

    B0 = scalarB0_lookup(M, mesh, conformal_exact, warnings)
    if B0 is None and require_scalar_b0:
        raise UnknownScalarB0(f"B0(n,1,g) unknown for {M.kind.value}")

    lower: list[BoundEntry] = []
    upper: list[BoundEntry] = []
    exact: float | None = None
    exact_reason = ""
    if B0 is not None:
        best = int(np.argmin(g_max))
        lower.append(
            BoundEntry(
                side="lower",
                value=float(lift * B0 / g_max[best]),
                provenance=BoundProvenance.DES1_LOWER,
                detail=f"t0={np.round(maxima.points[best], 12).tolist()}",
            )
        )
        upper.append(
            BoundEntry(
                side="upper",
                value=float(lift * B0 / m_G),
                provenance=BoundProvenance.DES1_UPPER,
            )
        )
        if g_max[best] <= m_G * (1.0 + PINCH_SLACK):
            exact = upper[0].value
            exact_reason = "des1 pinch: max_x G(x,t0) = m_G for some t0 in X_F"
    else:
        warning_emit(
            f"B0(n,1,g) unknown on {M.kind.value}: lower bounds only",
            warnings,
        )

    threshold_sup: float | None = None
    if n >= 4:
        threshold_sup = float(_geometricFactor(n) * A0_nF * ratio)
        lower.append(
            BoundEntry(
                side="lower",
                value=threshold_sup,
                provenance=BoundProvenance.GEOMETRIC,
            )
        )
    else:
        warning_emit("geometric bound not applicable for n=3", warnings)

    trivial = (M_F * volume) ** (2.0 / two_star) / g_int
    best_trivial = int(np.argmax(trivial))
    lower.append(
        BoundEntry(
            side="lower",
            value=float(trivial[best_trivial]),
            provenance=BoundProvenance.TRIVIAL,
            detail=f"t0={np.round(maxima.points[best_trivial], 12).tolist()}",
        )
    )

    report = BestConstantReport(
        n=n,
        k=F.k,
        A0_n=A0_n,
        M_F=M_F,
        A0_nF=A0_nF,
        B0_scalar=B0,
        m_G=m_G,
        threshold_sup=threshold_sup,
        lower=tuple(lower),
        upper=tuple(upper),
        exact=exact,
        exact_reason=exact_reason,
        warnings=tuple(warnings),
    )
    if report.max_lower > report.min_upper * (1.0 + INCONSISTENCY_SLACK):
        warnings.append(
            f"inconsistent bounds: lower {report.max_lower:.12g} > "
            f"upper {report.min_upper:.12g}"
        )
        LOG(warnings[-1], 1)
        report = replace(
            report, inconsistent=True, warnings=tuple(warnings)
        )
    return report


def geometricThreshold_compute(
    F: HomogeneousPotential,
    G: SpatialPotential,
    M: ModelManifold,
    r: float,
    X_F: MaximizerSet | None = None,
) -> float:
    """
    Local threshold (n-2)/(4(n-1)) A0(n,F) S_g(x) / m_{F,G}(x) at radius r.
    """
    if M.n < 4:
        LOG("geometric threshold used with n < 4", 1)
    maxima = X_F if X_F is not None else directionSphere_maximize(F)
    curvature = scalarCurvature_at(M, r)
    if curvature == 0.0:
        return 0.0
    A0_nF = a0Vector_compute(M.n, F, maxima)
    return float(
        _geometricFactor(M.n) * A0_nF * curvature / mFG_compute(G, r, maxima)
    )


def bEpsilon_compute(
    F: HomogeneousPotential,
    G: SpatialPotential,
    M: ModelManifold,
    x0: float,
    epsilon: float,
    X_F: MaximizerSet | None = None,
) -> float:
    """Threshold at distance x0 from the pole, plus epsilon."""
    if epsilon < 0.0:
        raise ValueError("epsilon must be nonnegative")
    return geometricThreshold_compute(F, G, M, x0, X_F) + epsilon


def dichotomy_classify(
    report: BestConstantReport,
    F: HomogeneousPotential,
    G: SpatialPotential,
    M: ModelManifold,
    tol: float | None = None,
    grid: RadialGrid | None = None,
) -> DichotomyVerdict:
    """
    Compare the bound interval of B0 with the geometric threshold.

    StrictlyAbove when the best lower bound clears the threshold supremum
    by a relative gap tol; TouchesWithin when the exact value meets the
    threshold within tol; Undetermined otherwise.

    Raises:
        NonFiniteConstant: If the threshold or a bound is nan, or the
            lower bound is infinite.
    """
    tolerance = appsettings.touches_tolerance if tol is None else tol
    warnings: list[str] = []
    if M.n < 5:
        warning_emit(
            f"n={M.n} < 5: compactness dichotomy is only indicative",
            warnings,
        )
    threshold = report.threshold_sup
    if threshold is None:
        mesh = grid if grid is not None else radialGrid_make(M)
        maxima = directionSphere_maximize(F)
        _, _, ratio = _sliceStatistics(
            G, mesh, maxima.points, scalarCurvature_profile(mesh)
        )
        threshold = float(
            _geometricFactor(M.n) * report.A0_nF * ratio
        )
    low, high = report.max_lower, report.min_upper
    if not (np.isfinite(threshold) and np.isfinite(low)):
        raise NonFiniteConstant(
            f"dichotomy needs finite numbers, got threshold={threshold} "
            f"and lower bound={low}"
        )
    if np.isnan(high) or (
        report.exact is not None and not np.isfinite(report.exact)
    ):
        raise NonFiniteConstant(
            f"dichotomy got upper bound={high} and exact={report.exact}"
        )
    verdict = Verdict.UNDETERMINED
    if report.inconsistent:
        warning_emit("inconsistent bound table: verdict withheld", warnings)
    elif low - threshold >= tolerance * max(abs(threshold), abs(low)) and (
        low > threshold
    ):
        verdict = Verdict.STRICTLY_ABOVE
    elif report.exact is not None and abs(
        report.exact - threshold
    ) <= tolerance * abs(report.exact):
        verdict = Verdict.TOUCHES_WITHIN
    LOG(
        f"dichotomy: threshold={threshold:.12g} interval=[{low:.12g}, "
        f"{high:.12g}] -> {verdict.value}",
        2,
    )
    return DichotomyVerdict(
        threshold_sup=threshold,
        b0_lower=low,
        b0_upper=high,
        verdict=verdict,
        tolerance=tolerance,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Continuity check
# ---------------------------------------------------------------------------


def _directionModulation(
    k: int, amplitude: float, rng: np.random.Generator, modes: int = 4
) -> DirectionValues:
    """Smooth factor 1 + amplitude * phi(theta) with |phi| <= 1."""
    frequencies = rng.normal(0.0, 2.0, size=(modes, k))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)

    def factor(theta: FloatArray) -> FloatArray:
        waves = np.cos(theta @ frequencies.T + phases)
        return 1.0 + amplitude * waves.mean(axis=1)

    return factor


def _modulated(
    P: HomogeneousPotential, factor: DirectionValues
) -> HomogeneousPotential:
    base = P.direction_values

    def values(theta: FloatArray) -> FloatArray:
        return base(theta) * factor(theta)

    return HomogeneousPotential(
        k=P.k,
        degree=P.degree,
        direction_values=values,
        label=f"perturbed {P.label}",
    )


def _endpoints(report: BestConstantReport) -> dict[str, float]:
    points = {"A0_nF": report.A0_nF}
    for entry in (*report.lower, *report.upper):
        points[f"{entry.side}:{entry.provenance.value}"] = entry.value
    return points


def bounds_continuityCheck(
    F: HomogeneousPotential,
    G: SpatialPotential,
    M: ModelManifold,
    amplitude: float,
    rng: np.random.Generator,
    grid: RadialGrid | None = None,
) -> float:
    """
    Largest relative move of a bound endpoint under a small perturbation.

    The restriction of F and every slice of G are multiplied by smooth
    random factors within [1 - amplitude, 1 + amplitude] on the direction
    sphere, the bound table is rebuilt on the same grid and compared
    entry by entry.

    Args:
        F: Degree-2* potential.
        G: Degree-2 spatial potential.
        M: Closed model manifold.
        amplitude: Relative sup-norm size of the perturbation, in [0, 1).
        rng: Generator of the random factors.
        grid: Grid shared by both assemblies.

    Returns:
        max |b' - b| / |b| over the endpoints present in both tables.
    """
    if not 0.0 <= amplitude < 1.0:
        raise ValueError("perturbation amplitude must lie in [0, 1)")
    mesh = grid if grid is not None else radialGrid_make(M)
    f_factor = _directionModulation(F.k, amplitude, rng)
    g_factor = _directionModulation(G.k, amplitude, rng)
    F_pert = _modulated(F, f_factor)
    G_pert = SpatialPotential(
        k=G.k,
        coefficients=G.coefficients,
        basis=tuple(_modulated(term, g_factor) for term in G.basis),
        label=f"perturbed {G.label}",
    )
    before = _endpoints(b0Bounds_assemble(F, G, M, grid=mesh))
    after = _endpoints(b0Bounds_assemble(F_pert, G_pert, M, grid=mesh))
    moves = [
        abs(after[key] - value) / abs(value)
        for key, value in before.items()
        if key in after and value != 0.0
    ]
    worst = max(moves, default=0.0)
    LOG(f"continuity check: amplitude={amplitude:g} move={worst:.3e}", 2)
    return float(worst)
