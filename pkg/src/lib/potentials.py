"""
Homogeneous potentials: evaluation, construction, optimization, smoothing

A potential of degree p is evaluated as |t|^p f(t/|t|) from its direction
restriction f. F-type potentials (degree 2*) are HomogeneousPotential
values; G-type potentials are SpatialPotential sums of radial coefficients
times degree-2 basis potentials.

Maxima of f are located by brute force on a direction lattice, seeded
local maxima are refined with Nelder-Mead and only improvements are kept.
Non-C^1 restrictions are mollified on the direction sphere until a sampled
sup-distance certificate is met.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from ..config import appsettings
from ..models.potentials import (
    DirectionGradient,
    FloatArray,
    HomogeneousPotential,
    MaximizerSet,
    RadialCoefficient,
    SmoothedPotential,
    SpatialPotential,
)
from .directions import (
    directionLattice_localMaxima,
    directionLattice_make,
    directionLattice_spacing,
)
from .log import LOG


class NonPositivePotential(ValueError):
    """Raised when a sampled direction restriction is not positive."""


class EmptyMaximizerSet(ValueError):
    """Raised when a maximizer set holds no points."""


class SmoothingFailed(ValueError):
    """Raised when the finest mollifier misses the requested tolerance."""


class MissingGradient(ValueError):
    """Raised when a gradient is requested from a continuous potential."""


# Seeds for local refinement must lie within this relative band of the
# sampled maximum.
SEED_BAND: float = 0.05
SEED_LIMIT: int = 64


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _rows(t: Any, k: int) -> tuple[FloatArray, bool]:
    points = np.asarray(t, dtype=np.float64)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    if points.shape[-1] != k:
        raise ValueError(
            f"potential acts on R^{k}, got vectors of length "
            f"{points.shape[-1]}"
        )
    return points, single


def potential_evaluate(P: HomogeneousPotential, t: Any) -> Any:
    """
    Evaluate |t|^degree * f(t/|t|), with value 0 at t = 0.

    Args:
        P: Potential to evaluate.
        t: A k-vector or an array of k-vectors, shape (m, k).

    Returns:
        A float for a single vector, otherwise an array of shape (m,).
    """
    points, single = _rows(t, P.k)
    radius = np.linalg.norm(points, axis=1)
    values = np.zeros(radius.shape)
    nonzero = radius > 0.0
    if np.any(nonzero):
        theta = points[nonzero] / radius[nonzero, None]
        values[nonzero] = radius[nonzero] ** P.degree * P.direction_values(
            theta
        )
    return float(values[0]) if single else values


def potential_gradient(P: HomogeneousPotential, t: Any) -> FloatArray:
    """
    Gradient of the homogeneous extension.

    For t = |t| theta the gradient is
    degree |t|^(p-1) f(theta) theta + |t|^(p-1) grad_T f(theta), where
    grad_T is the part of the ambient direction gradient tangent to the
    sphere. It vanishes at t = 0 since p > 1.

    Args:
        P: Differentiable potential.
        t: A k-vector or an array of k-vectors.

    Returns:
        Array with the shape of t.

    Raises:
        MissingGradient: If P carries no gradient evaluator.
    """
    if P.direction_gradient is None:
        raise MissingGradient(f"potential '{P.label}' has no gradient")
    points, single = _rows(t, P.k)
    radius = np.linalg.norm(points, axis=1)
    grad = np.zeros(points.shape)
    nonzero = radius > 0.0
    if np.any(nonzero):
        rad = radius[nonzero]
        theta = points[nonzero] / rad[:, None]
        f = P.direction_values(theta)
        g = P.direction_gradient(theta)
        tangent = g - np.sum(g * theta, axis=1)[:, None] * theta
        scale = rad ** (P.degree - 1.0)
        grad[nonzero] = scale[:, None] * (
            P.degree * f[:, None] * theta + tangent
        )
    return grad[0] if single else grad


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def lqPotential_make(q: float, degree: float, k: int) -> HomogeneousPotential:
    """
    The potential |t|_q^degree, e.g. |t|^(2*) (q=2) or |t|_1^4.

    Args:
        q: Exponent of the l^q norm, q >= 1.
        degree: Homogeneity degree.
        k: Codomain dimension.

    Returns:
        HomogeneousPotential with a gradient whenever it is C^1.
    """
    if q < 1.0:
        raise ValueError(f"l^q exponent must be >= 1, got {q}")

    def values(theta: FloatArray) -> FloatArray:
        s = np.sum(np.abs(theta) ** q, axis=1)
        return s ** (degree / q)

    def gradient(theta: FloatArray) -> FloatArray:
        s = np.sum(np.abs(theta) ** q, axis=1)
        outer = degree * s ** (degree / q - 1.0)
        inner = np.abs(theta) ** (q - 1.0) * np.sign(theta)
        return outer[:, None] * inner

    smooth = q > 1.0 or k == 1
    return HomogeneousPotential(
        k=k,
        degree=degree,
        direction_values=values,
        direction_gradient=gradient if smooth else None,
        label=f"|t|_{q:g}^{degree:g}",
        kind="lq",
        params={"q": q},
    )


def coordinatePowerPotential_make(
    coefficients: Sequence[float], degree: float
) -> HomogeneousPotential:
    """
    The potential sum_i c_i |t_i|^degree, e.g. |t_1|^4 + 0.5 |t_2|^4.

    Args:
        coefficients: Positive weights c_i.
        degree: Homogeneity degree, > 1 so the potential is C^1.
    """
    c = np.asarray(coefficients, dtype=np.float64)
    if np.any(c <= 0.0):
        raise NonPositivePotential("coordinate weights must be positive")

    def values(theta: FloatArray) -> FloatArray:
        return np.sum(c * np.abs(theta) ** degree, axis=1)

    def gradient(theta: FloatArray) -> FloatArray:
        return degree * c * np.abs(theta) ** (degree - 1.0) * np.sign(theta)

    terms = " + ".join(f"{w:g}|t_{i + 1}|^{degree:g}" for i, w in enumerate(c))
    return HomogeneousPotential(
        k=int(c.size),
        degree=degree,
        direction_values=values,
        direction_gradient=gradient,
        label=terms,
        kind="coordinate-power",
        params={"coefficients": c.tolist()},
    )


def productPotential_make(
    i: int, j: int, k: int, absolute: bool
) -> HomogeneousPotential:
    """
    Degree-2 product term t_i t_j, or |t_i||t_j| when absolute is set.

    The absolute product of two distinct coordinates has a kink on the
    coordinate axes and therefore no gradient.
    """
    if not (0 <= i < k and 0 <= j < k):
        raise ValueError(f"indices ({i}, {j}) out of range for k={k}")

    def values(theta: FloatArray) -> FloatArray:
        if absolute:
            return np.abs(theta[:, i]) * np.abs(theta[:, j])
        return theta[:, i] * theta[:, j]

    def gradient(theta: FloatArray) -> FloatArray:
        grad = np.zeros(theta.shape)
        grad[:, i] += theta[:, j]
        grad[:, j] += theta[:, i]
        return grad

    smooth = (not absolute) or i == j
    mark = "|t_{}||t_{}|" if absolute else "t_{} t_{}"
    return HomogeneousPotential(
        k=k,
        degree=2.0,
        direction_values=values,
        direction_gradient=gradient if smooth else None,
        label=mark.format(i + 1, j + 1),
        kind="product",
        params={"i": i, "j": j, "absolute": absolute},
    )


def quadraticFormPotential_make(matrix: Any) -> HomogeneousPotential:
    """x-independent quadratic form t^T A t with symmetric A."""
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("quadratic form needs a square matrix")
    A = 0.5 * (A + A.T)

    def values(theta: FloatArray) -> FloatArray:
        return np.einsum("mi,ij,mj->m", theta, A, theta)

    def gradient(theta: FloatArray) -> FloatArray:
        return 2.0 * theta @ A

    return HomogeneousPotential(
        k=int(A.shape[0]),
        degree=2.0,
        direction_values=values,
        direction_gradient=gradient,
        label="t^T A t",
        kind="quadratic-form",
        params={"matrix": A.tolist()},
    )


def tablePotential_make(
    directions: FloatArray, values: FloatArray, degree: float
) -> HomogeneousPotential:
    """
    Potential sampled on a direction table, evaluated by nearest lookup.

    Args:
        directions: Sample directions, shape (m, k); normalized on entry.
        values: Restriction values at the samples, shape (m,).
        degree: Homogeneity degree.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    vals = np.asarray(values, dtype=np.float64)
    if dirs.shape[0] != vals.shape[0]:
        raise ValueError("direction table and values differ in length")
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    tree = cKDTree(dirs)

    def lookup(theta: FloatArray) -> FloatArray:
        _, index = tree.query(theta)
        return vals[index]

    return HomogeneousPotential(
        k=int(dirs.shape[1]),
        degree=degree,
        direction_values=lookup,
        direction_gradient=None,
        label=f"table[{dirs.shape[0]}]",
        kind="table",
        params={"directions": dirs.tolist(), "values": vals.tolist()},
    )


def potential_scale(
    factor: float, P: HomogeneousPotential
) -> HomogeneousPotential:
    """Return factor * P for a positive factor."""
    if factor <= 0.0:
        raise ValueError("potential scale factor must be positive")
    base_values = P.direction_values
    base_gradient = P.direction_gradient

    def values(theta: FloatArray) -> FloatArray:
        return factor * base_values(theta)

    gradient: DirectionGradient | None = None
    if base_gradient is not None:

        def gradient(theta: FloatArray) -> FloatArray:
            return factor * base_gradient(theta)

    return HomogeneousPotential(
        k=P.k,
        degree=P.degree,
        direction_values=values,
        direction_gradient=gradient,
        label=f"{factor:g}*{P.label}",
        kind="scaled",
        params={"factor": factor, "base": P},
    )


def potential_compose(
    P: HomogeneousPotential, linear: Any
) -> HomogeneousPotential:
    """
    Return t -> P(L t) for an invertible k x k matrix L.

    With an orthogonal L this rotates the maximizer set of P, which is how
    a maximizer of F is aligned with a minimizer of G.
    """
    L = np.asarray(linear, dtype=np.float64)
    if L.shape != (P.k, P.k):
        raise ValueError(f"composition needs a {P.k}x{P.k} matrix")
    if abs(float(np.linalg.det(L))) < 1e-14:
        raise ValueError("composition matrix must be invertible")

    def values(theta: FloatArray) -> FloatArray:
        return np.asarray(potential_evaluate(P, theta @ L.T))

    gradient: DirectionGradient | None = None
    if P.direction_gradient is not None:

        def gradient(theta: FloatArray) -> FloatArray:
            return potential_gradient(P, theta @ L.T) @ L

    return HomogeneousPotential(
        k=P.k,
        degree=P.degree,
        direction_values=values,
        direction_gradient=gradient,
        label=f"{P.label}(L t)",
        kind="composed",
        params={"matrix": L.tolist(), "base": P},
    )


def rotation_make(source: Any, target: Any) -> FloatArray:
    """
    Orthogonal matrix L with L @ source = target for unit vectors.

    The rotation acts in the plane spanned by both vectors and fixes its
    orthogonal complement.
    """
    a = np.asarray(source, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    identity = np.eye(a.size)
    if np.allclose(a, b, rtol=0.0, atol=1e-15):
        return identity
    if np.allclose(a, -b, rtol=0.0, atol=1e-15):
        return -identity
    cos = float(np.clip(a @ b, -1.0, 1.0))
    w = b - cos * a
    w = w / np.linalg.norm(w)
    sin = float(np.sqrt(max(0.0, 1.0 - cos * cos)))
    return (
        identity
        + sin * (np.outer(w, a) - np.outer(a, w))
        + (cos - 1.0) * (np.outer(a, a) + np.outer(w, w))
    )


# ---------------------------------------------------------------------------
# Spatial potentials
# ---------------------------------------------------------------------------


def spatialPotential_uniform(
    P: HomogeneousPotential, coefficient: RadialCoefficient | None = None
) -> SpatialPotential:
    """
    G(x, t) = c(r) * P(t) for a degree-2 potential P.

    With no coefficient G does not depend on x.
    """
    c = coefficient if coefficient is not None else RadialCoefficient(1.0)
    return SpatialPotential(
        k=P.k,
        coefficients=(c,),
        basis=(P,),
        label=P.label if c.constant and c.offset == 1.0 else f"c(r)*{P.label}",
        kind="weighted",
        params={"coefficient": c, "base": P},
    )


def _coefficient(entry: Any) -> RadialCoefficient:
    if isinstance(entry, RadialCoefficient):
        return entry
    return RadialCoefficient(float(entry))


def _pairTerms(
    matrix: Sequence[Sequence[Any]], absolute: bool
) -> tuple[tuple[RadialCoefficient, ...], tuple[HomogeneousPotential, ...]]:
    k = len(matrix)
    coeffs: list[RadialCoefficient] = []
    basis: list[HomogeneousPotential] = []
    for i in range(k):
        if len(matrix[i]) != k:
            raise ValueError("coefficient matrix must be square")
        for j in range(k):
            c = _coefficient(matrix[i][j])
            if c.constant and c.offset == 0.0:
                continue
            coeffs.append(c)
            basis.append(productPotential_make(i, j, k, absolute))
    if not basis:
        raise ValueError("coefficient matrix is identically zero")
    return tuple(coeffs), tuple(basis)


def spatialQuadraticForm_make(
    matrix: Sequence[Sequence[Any]],
) -> SpatialPotential:
    """G(x, t) = sum_ij A_ij(r) t_i t_j."""
    coeffs, basis = _pairTerms(matrix, absolute=False)
    return SpatialPotential(
        k=len(matrix),
        coefficients=coeffs,
        basis=basis,
        label="sum A_ij(x) t_i t_j",
        kind="quadratic-form",
        params={"matrix": matrix},
    )


def absBilinearPotential_make(
    matrix: Sequence[Sequence[Any]],
) -> SpatialPotential:
    """G(x, t) = sum_ij A_ij(r) |t_i| |t_j|."""
    coeffs, basis = _pairTerms(matrix, absolute=True)
    return SpatialPotential(
        k=len(matrix),
        coefficients=coeffs,
        basis=basis,
        label="sum A_ij(x) |t_i||t_j|",
        kind="abs-bilinear",
        params={"matrix": matrix},
    )


def spatialPotential_scale(
    factor: float, G: SpatialPotential
) -> SpatialPotential:
    """Return factor * G for a positive factor."""
    if factor <= 0.0:
        raise ValueError("potential scale factor must be positive")
    return SpatialPotential(
        k=G.k,
        coefficients=tuple(c.scaled(factor) for c in G.coefficients),
        basis=G.basis,
        label=f"{factor:g}*{G.label}",
        kind=G.kind,
        params={**G.params, "factor": factor},
    )


def spatialPotential_evaluate(
    G: SpatialPotential, r: FloatArray, U: FloatArray
) -> FloatArray:
    """
    Evaluate G(r_i, U_i) row by row.

    Args:
        G: Spatial potential.
        r: Radii, shape (m,).
        U: Vectors, shape (m, k).
    """
    C = G.coefficient_matrix(r)
    total = np.zeros(U.shape[0])
    for weights, term in zip(C, G.basis, strict=True):
        total += weights * potential_evaluate(term, U)
    return total


def spatialPotential_gradient(
    G: SpatialPotential, r: FloatArray, U: FloatArray
) -> FloatArray:
    """Gradient of G(r_i, .) at U_i row by row, shape (m, k)."""
    C = G.coefficient_matrix(r)
    total = np.zeros(U.shape)
    for weights, term in zip(C, G.basis, strict=True):
        total += weights[:, None] * potential_gradient(term, U)
    return total


def spatialPotential_directionTable(
    G: SpatialPotential, r: FloatArray, directions: FloatArray
) -> FloatArray:
    """Values G(r_a, theta_b), shape (len(r), len(directions))."""
    C = G.coefficient_matrix(r)
    B = np.vstack([term.direction_values(directions) for term in G.basis])
    return C.T @ B


# ---------------------------------------------------------------------------
# Optimization on the direction sphere
# ---------------------------------------------------------------------------


def _refine(
    P: HomogeneousPotential, seed: FloatArray, scale: float, spacing: float
) -> tuple[FloatArray, float]:
    def objective_angle(x: FloatArray) -> float:
        theta = np.array([[np.cos(x[0]), np.sin(x[0])]])
        return -float(P.direction_values(theta)[0]) / scale

    def objective_ambient(x: FloatArray) -> float:
        norm = float(np.linalg.norm(x))
        if norm == 0.0:
            return 0.0
        return -float(P.direction_values((x / norm)[None, :])[0]) / scale

    if P.k == 2:
        angle = float(np.arctan2(seed[1], seed[0]))
        simplex = np.array([[angle], [angle + 0.25 * spacing]])
        result = minimize(
            objective_angle,
            x0=np.array([angle]),
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": 1e-13,
                "fatol": 1e-16,
                "maxiter": 400,
            },
        )
        best = float(result.x[0])
        point = np.array([np.cos(best), np.sin(best)])
    else:
        simplex = np.vstack([seed, seed + 0.5 * spacing * np.eye(P.k)])
        result = minimize(
            objective_ambient,
            x0=seed,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": 1e-12,
                "fatol": 1e-16,
                "maxiter": 200 * P.k,
            },
        )
        point = np.asarray(result.x, dtype=np.float64)
        point = point / np.linalg.norm(point)
    value = float(P.direction_values(point[None, :])[0])
    return point, value


def directionSphere_maximize(
    P: HomogeneousPotential, refine_tol: float | None = None
) -> MaximizerSet:
    """
    Maximum M_F of the restriction f and the set of its maximizers.

    Local maxima of the lattice samples within a band of the sampled
    maximum seed a Nelder-Mead refinement; a refined point replaces its
    seed only when it improves on it. Points within `refine_tol` of the
    maximum (relative) form the maximizer set, deduplicated at half the
    lattice spacing and ordered by descending coordinates.

    Args:
        P: Positive potential.
        refine_tol: Relative membership band, default from settings.

    Returns:
        MaximizerSet; degenerate when f is constant on the lattice.

    Raises:
        NonPositivePotential: If some sampled value is not positive.
    """
    tol = appsettings.maximizer_tolerance if refine_tol is None else refine_tol
    lattice = directionLattice_make(P.k)
    values = np.asarray(P.direction_values(lattice), dtype=np.float64)
    if not np.all(np.isfinite(values)) or float(values.min()) <= 0.0:
        raise NonPositivePotential(
            f"potential '{P.label}' is not positive on the direction sphere "
            f"(min sample {float(np.nanmin(values)):.6g})"
        )
    top = float(values.max())
    bottom = float(values.min())
    if top - bottom <= tol * top:
        LOG(f"{P.label}: constant restriction, all directions maximize", 3)
        return MaximizerSet(
            M_F=top, points=np.array(lattice), tolerance=tol, degenerate=True
        )

    seeds = directionLattice_localMaxima(lattice, values)
    seeds = seeds[values[seeds] >= top * (1.0 - SEED_BAND)]
    seeds = seeds[np.argsort(-values[seeds], kind="stable")][:SEED_LIMIT]
    spacing = directionLattice_spacing(lattice)

    candidates: list[tuple[FloatArray, float]] = []
    for index in seeds:
        seed = np.array(lattice[index])
        seed_value = float(values[index])
        if P.k == 1:
            candidates.append((seed, seed_value))
            continue
        point, value = _refine(P, seed, top, spacing)
        if value > seed_value:
            candidates.append((point, value))
        else:
            candidates.append((seed, seed_value))

    M_F = max(value for _, value in candidates)
    members = sorted(
        (c for c in candidates if c[1] >= M_F * (1.0 - tol)),
        key=lambda c: -c[1],
    )
    kept: list[FloatArray] = []
    for point, _ in members:
        if all(
            np.linalg.norm(point - other) > 0.5 * spacing for other in kept
        ):
            kept.append(point)
    points = np.array(kept)
    order = np.lexsort(tuple(-points[:, i] for i in reversed(range(P.k))))
    LOG(f"{P.label}: M_F={M_F:.12g} at {len(kept)} direction(s)", 3)
    return MaximizerSet(M_F=M_F, points=points[order], tolerance=tol)


def mFG_compute(
    G: SpatialPotential, r: float, X_F: MaximizerSet
) -> float:
    """
    m_{F,G}(x) = min of G(x, .) over the maximizer set of F.

    Raises:
        EmptyMaximizerSet: If X_F holds no points.
    """
    if X_F.count == 0:
        raise EmptyMaximizerSet("maximizer set is empty")
    slice_ = G.potential_at(r)
    return float(np.min(slice_.direction_values(X_F.points)))


def globalMin_compute(
    G: SpatialPotential, radii: FloatArray | None = None
) -> float:
    """
    m_G = min of G over the sampled manifold and the direction lattice.

    Args:
        G: Spatial potential.
        radii: Manifold sample radii. Defaults to the single pole for
            x-independent G, otherwise to a uniform grid on [0, pi].
    """
    if radii is None:
        if G.independent:
            radii = np.zeros(1)
        else:
            radii = np.linspace(0.0, np.pi, appsettings.grid_n + 1)
    C = np.unique(G.coefficient_matrix(radii).T, axis=0)
    lattice = directionLattice_make(G.k)
    best = np.inf
    for start in range(0, lattice.shape[0], 8192):
        chunk = lattice[start : start + 8192]
        B = np.vstack([term.direction_values(chunk) for term in G.basis])
        best = min(best, float((C @ B).min()))
    return float(best)


# ---------------------------------------------------------------------------
# Smoothing
# ---------------------------------------------------------------------------


def _circleSmooth(
    H0: HomogeneousPotential, epsilon: float, require_positive: bool
) -> SmoothedPotential:
    samples = appsettings.smoothing_circle_samples
    angles = 2.0 * np.pi * np.arange(samples) / samples
    mid = angles + np.pi / samples
    f0 = H0.direction_values(np.column_stack([np.cos(angles), np.sin(angles)]))
    f0_mid = H0.direction_values(np.column_stack([np.cos(mid), np.sin(mid)]))
    modes = np.fft.rfftfreq(samples, d=1.0 / samples)
    spectrum = np.fft.rfft(f0)
    min_width = 2.0 * (2.0 * np.pi / samples)
    width = appsettings.smoothing_start_width
    knots = np.append(angles, 2.0 * np.pi)
    while width >= min_width:
        damp = np.exp(-0.5 * (width * modes) ** 2)
        smoothed = np.fft.irfft(spectrum * damp, n=samples)
        spline = CubicSpline(
            knots, np.append(smoothed, smoothed[0]), bc_type="periodic"
        )
        deviation = max(
            float(np.max(np.abs(smoothed - f0))),
            float(np.max(np.abs(spline(mid) - f0_mid))),
        )
        LOG(f"circle mollifier width={width:.3e} deviation={deviation:.3e}", 3)
        if deviation <= epsilon:
            if require_positive and float(smoothed.min()) <= 0.0:
                raise SmoothingFailed("smoothed restriction is not positive")
            return SmoothedPotential(
                potential=_splineRestriction(H0, spline, width),
                epsilon=epsilon,
                deviation=deviation,
                width=width,
            )
        width *= 0.5
    raise SmoothingFailed(
        f"no mollifier width >= {min_width:.3e} meets epsilon={epsilon:g} "
        f"for '{H0.label}'"
    )


def _splineRestriction(
    H0: HomogeneousPotential, spline: CubicSpline, width: float
) -> HomogeneousPotential:
    derivative = spline.derivative()
    period = 2.0 * np.pi

    def values(theta: FloatArray) -> FloatArray:
        phi = np.mod(np.arctan2(theta[:, 1], theta[:, 0]), period)
        return np.asarray(spline(phi))

    def gradient(theta: FloatArray) -> FloatArray:
        phi = np.mod(np.arctan2(theta[:, 1], theta[:, 0]), period)
        slope = np.asarray(derivative(phi))
        tangent = np.column_stack([-np.sin(phi), np.cos(phi)])
        return slope[:, None] * tangent

    return HomogeneousPotential(
        k=2,
        degree=H0.degree,
        direction_values=values,
        direction_gradient=gradient,
        label=f"smooth[{width:.2e}]({H0.label})",
        kind="smoothed",
        params={"width": width, "base": H0},
    )


def _kernelRestriction(
    H0: HomogeneousPotential,
    lattice: FloatArray,
    f0: FloatArray,
    width: float,
) -> HomogeneousPotential:
    kappa = 1.0 / (width * width)
    tree = cKDTree(lattice)
    cutoff = min(2.0, 5.0 * width)
    k = lattice.shape[1]

    def sums(theta: FloatArray) -> tuple[Any, ...]:
        pairs = cKDTree(theta).sparse_distance_matrix(
            tree, cutoff, output_type="ndarray"
        )
        rows, cols, chord = pairs["i"], pairs["j"], pairs["v"]
        w = np.exp(-0.5 * kappa * chord * chord)
        m = theta.shape[0]
        total = np.bincount(rows, weights=w, minlength=m)
        weighted = np.bincount(rows, weights=w * f0[cols], minlength=m)
        return rows, cols, w, total, weighted

    def values(theta: FloatArray) -> FloatArray:
        _, _, _, total, weighted = sums(theta)
        return weighted / total

    def gradient(theta: FloatArray) -> FloatArray:
        rows, cols, w, total, weighted = sums(theta)
        m = theta.shape[0]
        value = weighted / total
        grad = np.zeros((m, k))
        for axis in range(k):
            first = np.bincount(
                rows, weights=w * f0[cols] * lattice[cols, axis], minlength=m
            )
            second = np.bincount(
                rows, weights=w * lattice[cols, axis], minlength=m
            )
            grad[:, axis] = kappa * (first - value * second) / total
        return grad

    return HomogeneousPotential(
        k=k,
        degree=H0.degree,
        direction_values=values,
        direction_gradient=gradient,
        label=f"smooth[{width:.2e}]({H0.label})",
        kind="smoothed",
        params={"width": width, "base": H0},
    )


def _sphereSmooth(
    H0: HomogeneousPotential, epsilon: float, require_positive: bool
) -> SmoothedPotential:
    lattice = directionLattice_make(H0.k)
    f0 = np.asarray(H0.direction_values(lattice), dtype=np.float64)
    spacing = directionLattice_spacing(lattice)
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(2000, H0.k))
    samples /= np.linalg.norm(samples, axis=1)[:, None]
    stride = max(1, lattice.shape[0] // 2000)
    check = np.vstack([lattice[::stride], samples])
    exact = H0.direction_values(check)
    width = min(appsettings.smoothing_start_width, 8.0 * spacing)
    while width >= 1.5 * spacing:
        candidate = _kernelRestriction(H0, lattice, f0, width)
        approx = candidate.direction_values(check)
        deviation = float(np.max(np.abs(approx - exact)))
        LOG(f"kernel mollifier width={width:.3e} deviation={deviation:.3e}", 3)
        if deviation <= epsilon:
            if require_positive and float(approx.min()) <= 0.0:
                raise SmoothingFailed("smoothed restriction is not positive")
            return SmoothedPotential(candidate, epsilon, deviation, width)
        width *= 0.5
    raise SmoothingFailed(
        f"no kernel width >= {1.5 * spacing:.3e} meets epsilon={epsilon:g} "
        f"for '{H0.label}'"
    )


def potential_smooth(
    H0: HomogeneousPotential,
    epsilon: float,
    require_positive: bool = True,
) -> SmoothedPotential:
    """
    C^1 approximant H with |H - H0| <= epsilon |t|^p on sampled directions.

    Already differentiable potentials are returned unchanged with a zero
    certificate. On the circle the restriction is convolved with a wrapped
    Gaussian and interpolated by a periodic cubic spline; on higher
    spheres a normalized von Mises kernel average over the lattice is
    used. The width halves from the configured start until the sampled
    sup-distance meets epsilon.

    Args:
        H0: Potential to smooth.
        epsilon: Absolute tolerance on the direction restriction.
        require_positive: Reject approximants that are not positive.

    Returns:
        SmoothedPotential with the certificate and mollifier width.

    Raises:
        SmoothingFailed: If the finest width misses epsilon.
    """
    if epsilon <= 0.0:
        raise ValueError("smoothing tolerance must be positive")
    if H0.differentiable:
        return SmoothedPotential(H0, epsilon, 0.0, 0.0)
    if H0.k == 1:
        wrapped = HomogeneousPotential(
            k=1,
            degree=H0.degree,
            direction_values=H0.direction_values,
            direction_gradient=lambda theta: np.zeros(theta.shape),
            label=H0.label,
            kind=H0.kind,
            params=H0.params,
        )
        return SmoothedPotential(wrapped, epsilon, 0.0, 0.0)
    if H0.k == 2:
        return _circleSmooth(H0, epsilon, require_positive)
    return _sphereSmooth(H0, epsilon, require_positive)


def spatialPotential_smooth(
    G: SpatialPotential, epsilon: float
) -> tuple[SpatialPotential, float]:
    """
    Smooth every non-C^1 basis term of G.

    Each term gets an equal share of epsilon divided by the largest size
    of its coefficient, so every slice moves by at most epsilon.

    Returns:
        The smoothed potential and the certified slice deviation.
    """
    if G.differentiable:
        return G, 0.0
    weights = [abs(c.offset) + abs(c.amplitude) for c in G.coefficients]
    share = epsilon / len(G.basis)
    basis: list[HomogeneousPotential] = []
    deviation = 0.0
    for w, term in zip(weights, G.basis, strict=True):
        if term.differentiable or w == 0.0:
            basis.append(term)
            continue
        smoothed = potential_smooth(term, share / w, require_positive=False)
        basis.append(smoothed.potential)
        deviation += w * smoothed.deviation
    return (
        SpatialPotential(
            k=G.k,
            coefficients=G.coefficients,
            basis=tuple(basis),
            label=f"smooth({G.label})",
            kind=G.kind,
            params=G.params,
        ),
        deviation,
    )
