"""
Constrained minimization of A int |grad U|^2 + B int G(x, U) over
int F(U) = 1

Since F is 2*-homogeneous and J is 2-homogeneous, minimizing J on the
constraint set is the same as minimizing the scale-invariant quotient

    Q(U) = J(U) / (int F(U))^(2/2*)

followed by the rescale U <- U / (int F(U))^(1/2*). On the constraint set
the gradient of Q is the projected gradient

    g = grad J - (2/2*) lambda grad(int F),        lambda = J(U),

which vanishes exactly at solutions of the discrete Euler-Lagrange system

    -A Lap u_i + (B/2) dG/dt_i = (lambda/2*) dF/dt_i.

Descent is preconditioned by the discrete H^1 operator 2A K + 2(A+B) W,
factorized once per solve, with Armijo backtracking on Q. Integrals inside
the descent use the lumped masses W, so every gradient below is the exact
derivative of the discrete energy it belongs to.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import replace
from typing import Literal

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import SuperLU, splu

from ..config import appsettings
from ..models.geometry import RadialGrid, VectorRadialField
from ..models.potentials import FloatArray, MaximizerSet
from ..models.solver import (
    CandidateEnergy,
    IterationRecord,
    LocalCheckResult,
    PrecheckResult,
    SolverConfig,
    SolverResult,
    VariationalProblem,
)
from .constants import a0Vector_compute, bEpsilon_compute
from .directions import directionLattice_make
from .fields import field_fromProfile, fieldL2_compute
from .log import LOG, warning_emit
from .manifolds import (
    NonPositiveDensity,
    gradientDirichlet_compute,
    quadrature_compute,
    radialGrid_make,
    radialLaplacian_apply,
    stiffness_assemble,
)
from .potentials import (
    MissingGradient,
    directionSphere_maximize,
    potential_evaluate,
    potential_gradient,
    potential_smooth,
    spatialPotential_directionTable,
    spatialPotential_evaluate,
    spatialPotential_gradient,
    spatialPotential_smooth,
)


class NotConverged(RuntimeError):
    """Raised in strict mode when the descent misses its residual target."""


ARMIJO: float = 1.0e-4
STEP_GROWTH_CAP: float = 64.0
STEP_FLOOR: float = 1.0e-14
TIE_TOLERANCE: float = 1.0e-10
BUBBLE_SCALES: tuple[float, ...] = (0.3, 0.1, 0.03)
MARGINAL_BAND: float = 0.05
PRECHECK_SLACK: float = 1.0e-6


# ---------------------------------------------------------------------------
# Energies and gradients
# ---------------------------------------------------------------------------


def constraintMass_evaluate(
    U: VectorRadialField, problem: VariationalProblem
) -> float:
    """Discrete constraint mass int F(U) on the lumped node masses."""
    return float(
        U.grid.weights @ np.asarray(potential_evaluate(problem.F, U.values))
    )


def _gIntegral(U: VectorRadialField, problem: VariationalProblem) -> float:
    grid = U.grid
    return float(
        grid.weights @ spatialPotential_evaluate(problem.G, grid.r, U.values)
    )


def energy_evaluate(
    U: VectorRadialField, problem: VariationalProblem
) -> float:
    """J(U) = A int |grad U|^2 + B int G(x, U), without normalization."""
    energy = problem.coeff_A * gradientDirichlet_compute(U)
    if problem.coeff_B != 0.0:
        energy += problem.coeff_B * _gIntegral(U, problem)
    return float(energy)


def quotient_evaluate(
    U: VectorRadialField, problem: VariationalProblem
) -> float:
    """
    Scale-invariant energy J(U) / (int F(U))^(2/2*).

    Raises:
        NonPositiveDensity: If int F(U) is not positive.
    """
    mass = constraintMass_evaluate(U, problem)
    if mass <= 0.0:
        raise NonPositiveDensity(f"constraint mass {mass:.6g} is not positive")
    two_star = U.grid.manifold.critical_exponent
    return energy_evaluate(U, problem) / mass ** (2.0 / two_star)


def jGradient_compute(
    U: VectorRadialField,
    problem: VariationalProblem,
    stiffness: sparse.csr_matrix | None = None,
) -> FloatArray:
    """
    Gradient of the discrete J with respect to the node values of U.

    Returns:
        Array of shape (nodes, k): 2A K U + B W grad_t G(r, U).

    Raises:
        MissingGradient: If G has a non-differentiable term and B > 0.
    """
    grid = U.grid
    K = stiffness if stiffness is not None else stiffness_assemble(grid)
    gradient = 2.0 * problem.coeff_A * np.asarray(K @ U.values)
    if problem.coeff_B != 0.0:
        gradient += (
            problem.coeff_B
            * grid.weights[:, None]
            * spatialPotential_gradient(problem.G, grid.r, U.values)
        )
    return gradient


def massGradient_compute(
    U: VectorRadialField, problem: VariationalProblem
) -> FloatArray:
    """Gradient W grad_t F(U) of the discrete constraint mass int F(U)."""
    return U.grid.weights[:, None] * potential_gradient(problem.F, U.values)


def quotientGradient_compute(
    U: VectorRadialField,
    problem: VariationalProblem,
    stiffness: sparse.csr_matrix | None = None,
) -> FloatArray:
    """
    Gradient of the quotient J(U) / m(U)^(2/2*), m(U) = int F(U).

    Equals (grad J - (2/2*) (J / m) grad m) / m^(2/2*); on the constraint
    set m = 1 this is the projected gradient the descent follows.

    Raises:
        NonPositiveDensity: If int F(U) is not positive.
        MissingGradient: If G has a non-differentiable term and B > 0.
    """
    mass = constraintMass_evaluate(U, problem)
    if mass <= 0.0:
        raise NonPositiveDensity(f"constraint mass {mass:.6g} is not positive")
    two_star = U.grid.manifold.critical_exponent
    ratio = energy_evaluate(U, problem) / mass
    gradient = jGradient_compute(U, problem, stiffness) - (
        2.0 / two_star
    ) * ratio * massGradient_compute(U, problem)
    return np.asarray(gradient / mass ** (2.0 / two_star))


def _normalize(
    U: VectorRadialField, problem: VariationalProblem
) -> VectorRadialField:
    mass = constraintMass_evaluate(U, problem)
    if mass <= 0.0:
        raise NonPositiveDensity(f"constraint mass {mass:.6g} is not positive")
    two_star = U.grid.manifold.critical_exponent
    return U.with_values(U.values / mass ** (1.0 / two_star))


def elResidual_compute(
    U: VectorRadialField,
    problem: VariationalProblem,
    lam: float | None = None,
) -> float:
    """
    Relative Euler-Lagrange residual of U.

    The residual profiles -A Lap u_i + (B/2) dG/dt_i - (lambda/2*) dF/dt_i
    are measured in the quadrature L2 norm and divided by the H^1 norm of
    U. lambda defaults to J(U) / int F(U), the multiplier of a stationary
    point that is not normalized.

    Raises:
        MissingGradient: If F or G is not differentiable.
    """
    F, G = problem.F, problem.G
    if not F.differentiable:
        raise MissingGradient(
            f"F '{F.label}' has no gradient; smooth it first"
        )
    if problem.coeff_B != 0.0 and not G.differentiable:
        raise MissingGradient(
            f"G '{G.label}' has no gradient; smooth it first"
        )
    grid = U.grid
    two_star = grid.manifold.critical_exponent
    if lam is None:
        mass = constraintMass_evaluate(U, problem)
        lam = energy_evaluate(U, problem) / mass if mass > 0.0 else 0.0
    profiles = -problem.coeff_A * radialLaplacian_apply(U.values, grid)
    if problem.coeff_B != 0.0:
        profiles += 0.5 * problem.coeff_B * spatialPotential_gradient(
            G, grid.r, U.values
        )
    profiles -= (lam / two_star) * potential_gradient(F, U.values)
    numerator = quadrature_compute(np.sum(profiles * profiles, axis=1), grid)
    h1 = gradientDirichlet_compute(U) + fieldL2_compute(U)
    if h1 == 0.0:
        return float(np.sqrt(numerator))
    return float(np.sqrt(numerator / h1))


# ---------------------------------------------------------------------------
# Initial guesses
# ---------------------------------------------------------------------------


def truncatedBubble_make(
    grid: RadialGrid, scale: float, t0: FloatArray
) -> VectorRadialField:
    """
    Bubble of width scale * r_max about the pole, lowered to vanish at the
    largest distance on the grid and clipped at zero.
    """
    n = grid.n
    width = scale * grid.r_max
    far = float(grid.distance.max())

    def bubble(d: FloatArray | float) -> FloatArray:
        scaled = np.asarray(d) / width
        return np.asarray((1.0 + scaled**2) ** (-(n - 2) / 2.0))

    profile = np.maximum(bubble(grid.distance) - bubble(far), 0.0)
    return field_fromProfile(grid, profile, t0)


def _constantDirection(
    problem: VariationalProblem, grid: RadialGrid
) -> FloatArray:
    # direction minimizing B int G(x, t) / F(t)^(2/2*) over the lattice
    lattice = directionLattice_make(problem.k)
    f = np.asarray(potential_evaluate(problem.F, lattice))
    if problem.coeff_B == 0.0:
        return np.array(lattice[int(np.argmax(f))])
    g_int = grid.weights @ spatialPotential_directionTable(
        problem.G, grid.r, lattice
    )
    score = g_int / f ** (2.0 / grid.manifold.critical_exponent)
    return np.array(lattice[int(np.argmin(score))])


def _bubbleDirection(
    problem: VariationalProblem, X_F: MaximizerSet
) -> FloatArray:
    slice_ = problem.G.potential_at(0.0)
    values = slice_.direction_values(X_F.points)
    return np.array(X_F.points[int(np.argmin(values))])


# ---------------------------------------------------------------------------
# Descent
# ---------------------------------------------------------------------------


def _descend(
    U0: VectorRadialField,
    problem: VariationalProblem,
    config: SolverConfig,
    solve: SuperLU,
    K: sparse.csr_matrix,
) -> tuple[VectorRadialField, float, float, bool, list[IterationRecord]]:
    U = _normalize(U0, problem)
    lam = energy_evaluate(U, problem)
    step = config.step
    history: list[IterationRecord] = []
    converged = False
    residual = elResidual_compute(U, problem, lam)
    for _ in range(config.max_iters):
        history.append(IterationRecord(lam=lam, residual=residual, step=step))
        if residual <= config.el_tol:
            converged = True
            break
        g = quotientGradient_compute(U, problem, K)
        direction = -np.asarray(solve.solve(g))
        slope = float(np.sum(g * direction))
        if slope >= 0.0:
            break
        accepted = False
        while step >= STEP_FLOOR:
            moved = U.with_values(U.values + step * direction)
            trial = _normalize(moved, problem)
            trial_lam = energy_evaluate(trial, problem)
            if trial_lam <= lam + ARMIJO * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            LOG(f"line search stalled at lambda={lam:.12g}", 3)
            break
        U, lam = trial, trial_lam
        residual = elResidual_compute(U, problem, lam)
        step = min(2.0 * step, STEP_GROWTH_CAP * config.step)
        LOG(f"descent: lambda={lam:.12g} residual={residual:.3e}", 3)
    return U, lam, residual, converged, history


def _smoothProblem(
    problem: VariationalProblem, config: SolverConfig, warnings: list[str]
) -> VariationalProblem:
    F, G = problem.F, problem.G
    needs_G = problem.coeff_B != 0.0 and not G.differentiable
    if F.differentiable and not needs_G:
        return problem
    if config.smoothing_eps <= 0.0:
        raise MissingGradient(
            "non-differentiable potentials need smoothing_eps > 0"
        )
    if not F.differentiable:
        F = potential_smooth(F, config.smoothing_eps).potential
    if needs_G:
        G, deviation = spatialPotential_smooth(G, config.smoothing_eps)
        LOG(f"G smoothed, slice deviation {deviation:.3e}", 2)
    warning_emit(
        f"potentials smoothed with epsilon={config.smoothing_eps:g}", warnings
    )
    return replace(problem, F=F, G=G)


def problem_minimize(
    problem: VariationalProblem, config: SolverConfig | None = None
) -> SolverResult:
    """
    Minimize J over the constraint set int F(U) = 1.

    Two restarts are descended: a truncated bubble at the pole (width
    drawn from the seed) and a constant map. The lower final energy wins;
    energies within 1e-10 relative prefer the constant map.

    Args:
        problem: Variational problem.
        config: Solver configuration; defaults from settings.

    Returns:
        SolverResult of the winning restart.

    Raises:
        MissingGradient: If potentials are not C^1 and smoothing_eps = 0.
        NonPositiveDensity: If the constraint mass degenerates.
        NotConverged: In strict mode, if the residual target is missed.
    """
    settings = config or SolverConfig(
        grid_N=appsettings.grid_n,
        step=appsettings.solver_step,
        max_iters=appsettings.solver_max_iters,
        el_tol=appsettings.solver_el_tol,
    )
    warnings: list[str] = []
    smooth = _smoothProblem(problem, settings, warnings)
    grid = radialGrid_make(smooth.manifold, settings.grid_N)
    K = stiffness_assemble(grid)
    A, B = smooth.coeff_A, smooth.coeff_B
    preconditioner = 2.0 * A * K + 2.0 * (A + B) * sparse.diags(grid.weights)
    solve = splu(preconditioner.tocsc())
    rng = np.random.default_rng(settings.seed)
    X_F = directionSphere_maximize(smooth.F)

    starts = {
        "constant": field_fromProfile(
            grid, np.ones(grid.node_count), _constantDirection(smooth, grid)
        ),
        "bubble": truncatedBubble_make(
            grid, float(rng.uniform(0.2, 0.4)), _bubbleDirection(smooth, X_F)
        ),
    }
    outcomes = {}
    for label, start in starts.items():
        outcomes[label] = _descend(start, smooth, settings, solve, K)
        LOG(
            f"restart '{label}': lambda={outcomes[label][1]:.12g} "
            f"residual={outcomes[label][2]:.3e}",
            2,
        )
    constant_lam = outcomes["constant"][1]
    bubble_lam = outcomes["bubble"][1]
    winner = "constant"
    if bubble_lam < constant_lam - TIE_TOLERANCE * abs(constant_lam):
        winner = "bubble"
    U, lam, residual, converged, history = outcomes[winner]
    if not converged:
        message = (
            f"solver did not reach residual {settings.el_tol:g} "
            f"(got {residual:.3e})"
        )
        if appsettings.strict_mode:
            raise NotConverged(message)
        warning_emit(message, warnings)
    return SolverResult(
        field=U,
        lam=lam,
        el_residual=residual,
        converged=converged,
        iterations=len(history),
        history=tuple(history),
        restart=winner,
        smoothing_eps=settings.smoothing_eps if smooth is not problem else 0.0,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Existence screening
# ---------------------------------------------------------------------------


def existence_precheck(
    problem: VariationalProblem,
    candidates: Sequence[VectorRadialField] | None = None,
    normalization: Literal["coefficient", "appendix"] = "coefficient",
    grid_N: int | None = None,
) -> PrecheckResult:
    """
    Screen the strict existence criterion on trial fields.

    In the coefficient normalization the candidates are scored with
    J = A0(n,F) int |grad U|^2 + B int G(x,U) on the constraint set and
    compared with 1. In the appendix normalization the score is
    int |grad U|^2 + (B/A) int G(x,U) and the threshold is A0(n,F)^(-1).

    Args:
        problem: Variational problem; its B is the candidate constant.
        candidates: Trial fields; by default the best constant map and
            truncated bubbles of widths 0.3, 0.1 and 0.03 of r_max.
        normalization: "coefficient" or "appendix".
        grid_N: Grid of the default candidates.
    """
    n = problem.manifold.n
    X_F = directionSphere_maximize(problem.F)
    A0_nF = a0Vector_compute(n, problem.F, X_F)
    if normalization == "coefficient":
        scored = replace(problem, coeff_A=A0_nF)
        threshold = 1.0
    elif normalization == "appendix":
        scored = replace(
            problem, coeff_A=1.0, coeff_B=problem.coeff_B / problem.coeff_A
        )
        threshold = 1.0 / A0_nF
    else:
        raise ValueError(f"unknown normalization '{normalization}'")

    fields: list[tuple[str, VectorRadialField]] = []
    if candidates is None:
        grid = radialGrid_make(problem.manifold, grid_N)
        fields.append(
            (
                "constant",
                field_fromProfile(
                    grid,
                    np.ones(grid.node_count),
                    _constantDirection(scored, grid),
                ),
            )
        )
        t0 = _bubbleDirection(problem, X_F)
        for scale in BUBBLE_SCALES:
            fields.append(
                (f"bubble[{scale:g}]", truncatedBubble_make(grid, scale, t0))
            )
    else:
        fields = [(f"candidate[{i}]", U) for i, U in enumerate(candidates)]

    energies = tuple(
        CandidateEnergy(label=label, value=quotient_evaluate(U, scored))
        for label, U in fields
    )
    best = min(energy.value for energy in energies)
    LOG(f"precheck ({normalization}): best={best:.12g} vs {threshold:.12g}", 2)
    return PrecheckResult(
        best_lambda=best,
        below_one=best < threshold * (1.0 - PRECHECK_SLACK),
        marginal=abs(best - threshold) <= MARGINAL_BAND * threshold,
        normalization=normalization,
        threshold=threshold,
        candidates=energies,
    )


# ---------------------------------------------------------------------------
# Local inequality
# ---------------------------------------------------------------------------


def _smoothBump(distance: FloatArray, radius: float) -> FloatArray:
    x = distance / radius
    inside = x < 1.0
    out = np.zeros(distance.shape)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def localInequality_margin(
    U: VectorRadialField, problem: VariationalProblem
) -> float:
    """
    RHS - LHS of (int F(U))^(2/2*) <= A int |grad U|^2 + B int G(x,U).

    The zero field has margin 0.
    """
    two_star = U.grid.manifold.critical_exponent
    lhs = max(constraintMass_evaluate(U, problem), 0.0) ** (2.0 / two_star)
    return energy_evaluate(U, problem) - lhs


def localInequality_check(
    problem: VariationalProblem,
    r0: float,
    epsilon: float,
    trials: int = 100,
    rng: np.random.Generator | None = None,
    grid_N: int | None = None,
) -> LocalCheckResult:
    """
    Test the local inequality with A = A0(n,F) and B = B_eps(F, G, g) on
    random smooth bumps supported in the ball B(pole, r0).

    Each trial is a sum of two C-infinity bumps of random radius in
    [r0/4, r0] with random amplitudes, placed along independent random
    directions of R^k.

    Raises:
        ValueError: If r0 does not fit inside the grid.
    """
    grid = radialGrid_make(problem.manifold, grid_N)
    if not 0.0 < r0 < grid.r_max:
        raise ValueError(f"r0={r0} must lie in (0, {grid.r_max})")
    generator = rng if rng is not None else np.random.default_rng(0)
    X_F = directionSphere_maximize(problem.F)
    A0_nF = a0Vector_compute(problem.manifold.n, problem.F, X_F)
    b_eps = bEpsilon_compute(
        problem.F, problem.G, problem.manifold, 0.0, epsilon, X_F
    )
    local = replace(problem, coeff_A=A0_nF, coeff_B=b_eps)
    k = problem.k

    violations = 0
    margin = np.inf
    for _ in range(trials):
        values = np.zeros((grid.node_count, k))
        for _ in range(2):
            radius = generator.uniform(0.25 * r0, r0)
            direction = generator.normal(size=k)
            direction /= np.linalg.norm(direction)
            amplitude = 10.0 ** generator.uniform(-1.0, 1.0)
            values += (
                amplitude
                * _smoothBump(grid.distance, radius)[:, None]
                * direction[None, :]
            )
        U = VectorRadialField(grid=grid, values=values)
        value = localInequality_margin(U, local)
        if value < -1e-12 * max(energy_evaluate(U, local), 1e-300):
            violations += 1
        margin = min(margin, value)
    LOG(
        f"local inequality: {violations} violation(s) in {trials} trials, "
        f"B_eps={b_eps:.12g}",
        2,
    )
    return LocalCheckResult(
        violations=violations,
        min_margin=float(margin) if trials else 0.0,
        trials=trials,
        b_epsilon=b_eps,
    )
