"""
Radial geometry of the model manifolds

Discretizes the round sphere, the flat torus (as its periodic 1-D
reduction), radially conformal spheres and truncated Euclidean balls along
the distance to a pole. Energies, gradients and operators come from one
lumped discretization; reported integrals use composite Simpson weights Q
on the same nodes, which needs an even number of intervals:

    weights      W_i = h * trapezoid_i * map'(s_i) * sigma_vol(r_i)
    quadrature   Q_i = h * simpson_i * map'(s_i) * sigma_vol(r_i)
    conductance  c_j = sigma_dir(r_{j+1/2}) / (map'(s_{j+1/2}) * h)
    Dirichlet    D(u) = sum_j c_j (u_{j+1} - u_j)^2
    Laplacian    (Lap u)_i = (flux divergence)_i / W_i

so that <Lap u, v>_W = -sum_j c_j du_j dv_j whenever u and v vanish near
the poles. On a conformal sphere g = phi^(4/(n-2)) h the volume density
carries phi^(2*) and the Dirichlet density carries phi^2. Pole nodes have
weight zero and use the regular limit Lap u(0) = 2n (u_1 - u_0) / r_1^2.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from ..config import appsettings
from ..models.geometry import (
    ConformalFactor,
    ManifoldKind,
    MassIntegrand,
    ModelManifold,
    RadialGrid,
    VectorRadialField,
)
from ..models.potentials import FloatArray, HomogeneousPotential
from .directions import sphereArea_compute
from .log import LOG
from .potentials import potential_evaluate


class GridMismatch(ValueError):
    """Raised when a profile does not live on the grid it is used with."""


class GridTooCoarse(ValueError):
    """Raised when a grid has too few intervals for differencing."""


class OffPoleCenter(ValueError):
    """Raised for geodesic balls not centred at the symmetry pole."""


class NonPositiveDensity(ValueError):
    """Raised when a conformal factor or a constraint mass is not positive."""


class OddGridIntervals(ValueError):
    """Raised when a Simpson grid is asked for an odd number of intervals."""


MIN_INTERVALS: int = 16


def unitSphere_volume(n: int) -> float:
    """Volume omega_n of the round unit sphere S^n."""
    return sphereArea_compute(n + 1)


# ---------------------------------------------------------------------------
# Conformal factors
# ---------------------------------------------------------------------------


def conformalFactor_spike(height: float, width: float) -> ConformalFactor:
    """Factor 1 + height * exp(-(r/width)^2), peaked at the pole."""
    return ConformalFactor(
        kind="spike",
        height=height,
        width=width,
        label=f"spike(h={height:g}, w={width:g})",
    )


def conformalFactor_table(
    nodes: FloatArray, values: FloatArray, label: str = "table"
) -> ConformalFactor:
    return ConformalFactor(
        kind="table",
        nodes=np.asarray(nodes, dtype=np.float64),
        values=np.asarray(values, dtype=np.float64),
        label=label,
    )


def conformalFactor_evaluate(cf: ConformalFactor, r: Any) -> FloatArray:
    """Values of the factor at radii r."""
    radii = np.asarray(r, dtype=np.float64)
    if cf.kind == "spike":
        if cf.height == 0.0:
            return np.ones(radii.shape)
        return 1.0 + cf.height * np.exp(-((radii / cf.width) ** 2))
    assert cf.nodes is not None and cf.values is not None
    if np.all(cf.values == cf.values[0]):
        return np.full(radii.shape, float(cf.values[0]))
    spline = CubicSpline(cf.nodes, cf.values, bc_type=((1, 0.0), (1, 0.0)))
    return np.asarray(spline(radii))


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def _trapezoid(count: int) -> FloatArray:
    weights = np.ones(count)
    weights[0] = weights[-1] = 0.5
    return weights


def _simpson(count: int) -> FloatArray:
    weights = np.ones(count)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return weights / 3.0


def _sphereGrid(M: ModelManifold, N: int) -> RadialGrid:
    n = M.n
    h = np.pi / N
    r = h * np.arange(N + 1)
    r[-1] = np.pi
    mid = r[:-1] + 0.5 * h
    area = unitSphere_volume(n - 1)
    sigma = area * np.sin(r) ** (n - 1)
    sigma[0] = sigma[-1] = 0.0
    sigma_mid = area * np.sin(mid) ** (n - 1)

    phi = np.ones(N + 1)
    phi_mid = np.ones(N)
    if M.kind is ManifoldKind.CONFORMAL_SPHERE:
        assert M.conformal_factor is not None
        phi = conformalFactor_evaluate(M.conformal_factor, r)
        phi_mid = conformalFactor_evaluate(M.conformal_factor, mid)
        if float(min(phi.min(), phi_mid.min())) <= 0.0:
            raise NonPositiveDensity(
                f"conformal factor '{M.conformal_factor.label}' is not "
                "positive on the grid"
            )
    two_star = M.critical_exponent
    density = sigma * phi**two_star
    left = np.arange(N)
    return RadialGrid(
        manifold=M,
        intervals=N,
        s=r.copy(),
        r=r,
        distance=r.copy(),
        weights=h * _trapezoid(N + 1) * density,
        quadrature=h * _simpson(N + 1) * density,
        cell_left=left,
        cell_right=left + 1,
        conductance=sigma_mid * phi_mid**2 / h,
        pole_nodes=(0, N),
        pole_neighbours=(1, N - 1),
        pole_ratio=(
            float(phi[0] ** (2.0 - two_star)),
            float(phi[-1] ** (2.0 - two_star)),
        ),
    )


def _torusGrid(M: ModelManifold, N: int) -> RadialGrid:
    side = M.side
    h = side / N
    r = h * np.arange(N)
    left = np.arange(N)
    density = side ** (M.n - 1)
    return RadialGrid(
        manifold=M,
        intervals=N,
        s=r.copy(),
        r=r,
        distance=np.minimum(r, side - r),
        weights=np.full(N, density * h),
        quadrature=np.full(N, density * h),
        cell_left=left,
        cell_right=(left + 1) % N,
        conductance=np.full(N, density / h),
        pole_nodes=(),
        pole_neighbours=(),
        pole_ratio=(),
        periodic=True,
    )


def _euclideanGrid(M: ModelManifold, N: int) -> RadialGrid:
    n = M.n
    s_max = float(np.arctan(M.radius))
    h = s_max / N
    s = h * np.arange(N + 1)
    s[-1] = s_max
    r = np.tan(s)
    r[-1] = M.radius
    jac = 1.0 / np.cos(s) ** 2
    s_mid = s[:-1] + 0.5 * h
    r_mid = np.tan(s_mid)
    jac_mid = 1.0 / np.cos(s_mid) ** 2
    area = unitSphere_volume(n - 1)
    density = jac * area * r ** (n - 1)
    left = np.arange(N)
    return RadialGrid(
        manifold=M,
        intervals=N,
        s=s,
        r=r,
        distance=r.copy(),
        weights=h * _trapezoid(N + 1) * density,
        quadrature=h * _simpson(N + 1) * density,
        cell_left=left,
        cell_right=left + 1,
        conductance=area * r_mid ** (n - 1) / (jac_mid * h),
        pole_nodes=(0,),
        pole_neighbours=(1,),
        pole_ratio=(1.0,),
    )


def radialGrid_make(M: ModelManifold, N: int | None = None) -> RadialGrid:
    """
    Build the radial discretization of a model manifold.

    Args:
        M: Model manifold.
        N: Number of parameter intervals; default from settings.

    Returns:
        RadialGrid with lumped and Simpson weights and cell conductances.

    Raises:
        GridTooCoarse: If N < 16.
        OddGridIntervals: If N is odd.
        NonPositiveDensity: If a conformal factor is not positive.
    """
    intervals = appsettings.grid_n if N is None else N
    if intervals < MIN_INTERVALS:
        raise GridTooCoarse(
            f"grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
        )
    if intervals % 2:
        raise OddGridIntervals(
            f"Simpson weights need an even interval count, got {intervals}"
        )
    if M.kind is ManifoldKind.FLAT_TORUS:
        return _torusGrid(M, intervals)
    if M.kind is ManifoldKind.EUCLIDEAN_BALL:
        return _euclideanGrid(M, intervals)
    return _sphereGrid(M, intervals)


def _profileCheck(values: FloatArray, grid: RadialGrid) -> FloatArray:
    array = np.asarray(values, dtype=np.float64)
    if array.shape[0] != grid.node_count:
        raise GridMismatch(
            f"profile has {array.shape[0]} nodes, grid has {grid.node_count}"
        )
    return array


def quadrature_compute(f: Any, grid: RadialGrid) -> float:
    """Integral sum_i Q_i f_i of a node profile (composite Simpson)."""
    return float(grid.quadrature @ _profileCheck(f, grid))


def volume_compute(M: ModelManifold, N: int | None = None) -> float:
    """Volume of M by quadrature of 1."""
    grid = radialGrid_make(M, N)
    return float(grid.quadrature.sum())


# ---------------------------------------------------------------------------
# Differential operators
# ---------------------------------------------------------------------------


def _fluxDivergence(values: FloatArray, grid: RadialGrid) -> FloatArray:
    diff = values[grid.cell_right] - values[grid.cell_left]
    cond = grid.conductance if values.ndim == 1 else grid.conductance[:, None]
    flux = cond * diff
    div = np.zeros(values.shape)
    np.add.at(div, grid.cell_left, flux)
    np.subtract.at(div, grid.cell_right, flux)
    return div


def radialLaplacian_apply(u: Any, grid: RadialGrid) -> FloatArray:
    """
    Laplace-Beltrami operator on radial profiles.

    Accepts a single profile (nodes,) or a stack of components
    (nodes, k). Interior nodes use the conservative flux form; poles use
    the regular limit; the outer node of a Euclidean ball is extrapolated
    linearly.

    Raises:
        GridTooCoarse: If the grid has fewer than 16 intervals.
        GridMismatch: If u is not a profile on grid.
    """
    if grid.intervals < MIN_INTERVALS:
        raise GridTooCoarse(f"{grid.intervals} intervals are too few")
    values = _profileCheck(u, grid)
    div = _fluxDivergence(values, grid)
    lap = np.zeros(values.shape)
    mass = grid.weights
    inner = mass > 0.0
    if values.ndim == 1:
        lap[inner] = div[inner] / mass[inner]
    else:
        lap[inner] = div[inner] / mass[inner, None]
    n = grid.n
    for pole, neighbour, ratio in zip(
        grid.pole_nodes, grid.pole_neighbours, grid.pole_ratio, strict=True
    ):
        gap = abs(float(grid.r[neighbour] - grid.r[pole]))
        jump = values[neighbour] - values[pole]
        lap[pole] = ratio * 2.0 * n * jump / gap**2
    if grid.manifold.kind is ManifoldKind.EUCLIDEAN_BALL:
        lap[-1] = 2.0 * lap[-2] - lap[-3]
    return lap


def stiffness_assemble(grid: RadialGrid) -> sparse.csr_matrix:
    """
    Stiffness matrix K with u^T K u = D(u) and K u = -flux divergence.
    """
    cells = grid.conductance.shape[0]
    rows = np.concatenate([np.arange(cells), np.arange(cells)])
    cols = np.concatenate([grid.cell_left, grid.cell_right])
    data = np.concatenate([-np.ones(cells), np.ones(cells)])
    incidence = sparse.csr_matrix(
        (data, (rows, cols)), shape=(cells, grid.node_count)
    )
    return (incidence.T @ sparse.diags(grid.conductance) @ incidence).tocsr()


def gradientDirichlet_compute(U: Any, grid: RadialGrid | None = None) -> float:
    """
    Dirichlet energy sum_i int |grad u_i|^2 of a field or profile stack.

    Args:
        U: VectorRadialField, or node values (nodes,) / (nodes, k).
        grid: Grid of raw node values; must match the field's own grid.

    Raises:
        GridMismatch: If values and grid disagree.
    """
    if isinstance(U, VectorRadialField):
        if grid is not None and not grid.compatible(U.grid):
            raise GridMismatch("field lives on a different grid")
        grid = U.grid
        values = U.values
    else:
        if grid is None:
            raise ValueError("raw profiles need a grid")
        values = _profileCheck(U, grid)
    diff = values[grid.cell_right] - values[grid.cell_left]
    if diff.ndim == 2:
        diff2 = np.sum(diff * diff, axis=1)
    else:
        diff2 = diff * diff
    return float(grid.conductance @ diff2)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------


def scalarCurvature_profile(grid: RadialGrid) -> FloatArray:
    """
    Scalar curvature at every node.

    Round sphere n(n-1), torus and Euclidean ball 0. For g = phi^(4/(n-2)) h
    the curvature is (-4(n-1)/(n-2) Lap_h phi + n(n-1) phi) phi^(1-2*), with
    Lap_h the round-sphere Laplacian on the same nodes.
    """
    M = grid.manifold
    n = M.n
    if M.kind is ManifoldKind.ROUND_SPHERE:
        return np.full(grid.node_count, float(n * (n - 1)))
    if M.kind is not ManifoldKind.CONFORMAL_SPHERE:
        return np.zeros(grid.node_count)
    assert M.conformal_factor is not None
    phi = conformalFactor_evaluate(M.conformal_factor, grid.r)
    round_grid = radialGrid_make(
        ModelManifold(ManifoldKind.ROUND_SPHERE, n), grid.intervals
    )
    lap = radialLaplacian_apply(phi, round_grid)
    coefficient = 4.0 * (n - 1) / (n - 2)
    return (-coefficient * lap + n * (n - 1) * phi) * phi ** (
        1.0 - M.critical_exponent
    )


def scalarCurvature_at(
    M: ModelManifold, r: float, grid: RadialGrid | None = None
) -> float:
    """Scalar curvature of M at radius r."""
    n = M.n
    if M.kind is ManifoldKind.ROUND_SPHERE:
        return float(n * (n - 1))
    if M.kind is not ManifoldKind.CONFORMAL_SPHERE:
        return 0.0
    mesh = grid if grid is not None else radialGrid_make(M)
    if not 0.0 <= r <= mesh.r_max:
        raise ValueError(f"radius {r} outside [0, {mesh.r_max}]")
    return float(np.interp(r, mesh.r, scalarCurvature_profile(mesh)))


# ---------------------------------------------------------------------------
# Ball masses
# ---------------------------------------------------------------------------


def _cellFraction(grid: RadialGrid, delta: float) -> FloatArray:
    d_left = grid.distance[grid.cell_left]
    d_right = grid.distance[grid.cell_right]
    lo = np.minimum(d_left, d_right)
    hi = np.maximum(d_left, d_right)
    return np.clip((delta - lo) / (hi - lo), 0.0, 1.0)


def ballIntegral_compute(
    density: Any, grid: RadialGrid, delta: float
) -> float:
    """
    Integral of a node density over the geodesic ball B(pole, delta).

    Node masses are shared equally between adjacent cells; a cell counts
    with the fraction of its distance span inside the ball, so the result
    is continuous and non-decreasing in delta and equals the quadrature
    total at delta = r_max.
    """
    values = _profileCheck(density, grid)
    node_mass = grid.quadrature * values
    degree = np.bincount(
        grid.cell_left, minlength=grid.node_count
    ) + np.bincount(grid.cell_right, minlength=grid.node_count)
    cell_mass = (
        node_mass[grid.cell_left] / degree[grid.cell_left]
        + node_mass[grid.cell_right] / degree[grid.cell_right]
    )
    return float(_cellFraction(grid, delta) @ cell_mass)


def ballMass_compute(
    U: VectorRadialField,
    delta: float,
    integrand: MassIntegrand | str,
    F: HomogeneousPotential | None = None,
    center: float = 0.0,
) -> float:
    """
    Mass of a field in the geodesic ball of radius delta about the pole.

    Args:
        U: Field.
        delta: Ball radius; values above r_max are clamped.
        integrand: F-mass, Dirichlet or L2.
        F: Potential of the F-mass; defaults to |t|^(2*).
        center: Distance of the ball centre from the pole; only 0 is
            supported.

    Raises:
        OffPoleCenter: If center is not the pole.
    """
    if center != 0.0:
        raise OffPoleCenter(
            f"balls must be centred at the pole, got distance {center}"
        )
    if delta < 0.0:
        raise ValueError("ball radius must be nonnegative")
    grid = U.grid
    radius = min(delta, grid.r_max)
    kind = MassIntegrand(integrand)
    if kind is MassIntegrand.DIRICHLET:
        diff = U.values[grid.cell_right] - U.values[grid.cell_left]
        energy = grid.conductance * np.sum(diff * diff, axis=1)
        return float(_cellFraction(grid, radius) @ energy)
    if kind is MassIntegrand.L2:
        density = np.sum(U.values * U.values, axis=1)
    elif F is None:
        density = U.norm ** grid.manifold.critical_exponent
    else:
        density = np.asarray(potential_evaluate(F, U.values))
    return ballIntegral_compute(density, grid, radius)


# ---------------------------------------------------------------------------
# Conformal factor from a source term
# ---------------------------------------------------------------------------


def conformalFactor_solve(
    n: int, source: Any, N: int | None = None
) -> ConformalFactor:
    """
    Solve -4(n-1)/(n-2) Lap u + u = f on the round sphere.

    The operator is positive, so a positive source gives a positive
    factor. Interior rows use the weighted stiffness form, pole rows the
    regular pole limit.

    Args:
        n: Dimension.
        source: Callable of r, or a profile on the round grid.
        N: Grid intervals.

    Returns:
        Table factor on the round-sphere nodes.

    Raises:
        NonPositiveDensity: If the solution is not positive.
    """
    grid = radialGrid_make(ModelManifold(ManifoldKind.ROUND_SPHERE, n), N)
    if callable(source):
        f = np.asarray(source(grid.r), dtype=np.float64)
    else:
        f = _profileCheck(source, grid)
    coefficient = 4.0 * (n - 1) / (n - 2)
    system = (
        coefficient * stiffness_assemble(grid) + sparse.diags(grid.weights)
    ).tolil()
    rhs = grid.weights * f
    for pole, neighbour in zip(
        grid.pole_nodes, grid.pole_neighbours, strict=True
    ):
        gap = abs(float(grid.r[neighbour] - grid.r[pole]))
        stiff = coefficient * 2.0 * n / gap**2
        system[pole, :] = 0.0
        system[pole, pole] = 1.0 + stiff
        system[pole, neighbour] = -stiff
        rhs[pole] = f[pole]
    u = np.asarray(spsolve(system.tocsc(), rhs))
    if float(u.min()) <= 0.0:
        raise NonPositiveDensity("solved conformal factor is not positive")
    LOG(f"conformal factor solved: max={u.max():.6g} min={u.min():.6g}", 3)
    return conformalFactor_table(grid.r, u, label="solved")
