"""
Executable example pipelines.

Each scenario builds its manifold and potentials, runs the module
operations it composes and records one CheckRecord per assertion. The
pass criteria are the module-level acceptance tolerances below; a
scenario adds no thresholds of its own.

    example1          bound pinch, factorized extremal, dichotomy verdicts
    example2          pinch appears once F is aligned with G by a rotation
    example3          pinch on a conformal sphere; non-existence is a note
    example4          blow-up family, TouchesWithin, reverse-Hoelder atoms
    example5          scalar curvature and geometric bound blow up along a
                      conformal family
    sphere-identity   (n(n-2)/4) A0(n) = omega_n^(-2/n) for n = 4..8
    torus-existence   constrained minimizer on the flat torus
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..models.constants import (
    BestConstantReport,
    BoundProvenance,
    Verdict,
)
from ..models.extremals import Inequality, SphereExtremalParams
from ..models.geometry import ManifoldKind, ModelManifold, RadialGrid
from ..models.potentials import (
    FloatArray,
    HomogeneousPotential,
    RadialCoefficient,
    SpatialPotential,
)
from ..models.run import ReportRow, RunConfig, ScenarioId
from ..models.scenarios import CheckRecord, ScenarioOutcome
from ..models.solver import SolverConfig, VariationalProblem
from .concentration import reverseHolder_check
from .constants import (
    a0Euclidean_compute,
    a0Vector_compute,
    b0Bounds_assemble,
    b0ScalarSphere_compute,
    dichotomy_classify,
)
from .extremals import (
    equalityResidual_compute,
    extremal_factorize,
    sphereExtremalFamily_make,
    sphereExtremalProfile_build,
)
from .log import LOG
from .manifolds import (
    conformalFactor_solve,
    conformalFactor_spike,
    radialGrid_make,
    scalarCurvature_profile,
    unitSphere_volume,
)
from .potentials import (
    absBilinearPotential_make,
    coordinatePowerPotential_make,
    directionSphere_maximize,
    lqPotential_make,
    potential_compose,
    rotation_make,
    spatialPotential_uniform,
)
from .solver import existence_precheck, problem_minimize


class ScenarioFailed(AssertionError):
    """Raised with the first failed check of a scenario."""


# Acceptance tolerances of the composed module operations.
PINCH_REL: float = 1.0e-10
SPHERE_IDENTITY_REL: float = 1.0e-6
EXTREMAL_RESIDUAL: float = 1.0e-5
FACTOR_DEVIATION: float = 1.0e-6
EL_RESIDUAL: float = 1.0e-6
TORUS_LAMBDA_REL: float = 1.0e-4
NU_FLOOR: float = 0.95
MARGIN_FLOOR: float = -0.02

EXTREMAL_GRID_N: int = 4096
EXTREMAL_BETA: float = 1.5
SPHERE_IDENTITY_DIMENSIONS: tuple[int, ...] = (4, 5, 6, 7, 8)
EXAMPLE5_ALPHAS: tuple[float, ...] = (1.0, 4.0, 16.0, 64.0)
TORUS_B: float = 0.5

EXAMPLE3_NOTE = (
    "Non-existence of extremal maps is analytic: an extremal map U0 would "
    "force equality in the scalar inequality for some nonzero component "
    "u0^j, and on a conformal sphere not isometric to the round one the "
    "scalar inequality has no extremal function. Only the pinch value is "
    "a numerical claim."
)


@dataclass(frozen=True)
class _Context:
    n: int | None
    grid_N: int
    tol: float
    seed: int
    el_tol: float
    max_iters: int
    step: float
    betas: list[float] | None
    deltas: list[float] | None
    example5_mode: str


def _context(config: RunConfig) -> _Context:
    numeric = config.numeric
    explicit_n = "n" in config.manifold.model_fields_set
    return _Context(
        n=config.manifold.n if explicit_n else None,
        grid_N=numeric.grid_N,
        tol=numeric.tol,
        seed=numeric.seed,
        el_tol=numeric.el_tol,
        max_iters=numeric.max_iters,
        step=numeric.step,
        betas=numeric.betas,
        deltas=numeric.deltas,
        example5_mode=numeric.example5_mode,
    )


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _within(
    name: str, value: float | None, expected: float, rel: float
) -> CheckRecord:
    passed = value is not None and abs(value - expected) <= rel * abs(
        expected
    )
    return CheckRecord(
        name=name,
        value=value,
        expected=f"{expected:.12g} within {rel:g} relative",
        passed=passed,
    )


def _atMost(name: str, value: float, limit: float) -> CheckRecord:
    return CheckRecord(name, value, f"<= {limit:g}", bool(value <= limit))


def _atLeast(name: str, value: float, limit: float) -> CheckRecord:
    return CheckRecord(name, value, f">= {limit:g}", bool(value >= limit))


def _below(name: str, value: float, limit: float) -> CheckRecord:
    return CheckRecord(name, value, f"< {limit:g}", bool(value < limit))


def _is(name: str, value: Any, expected: Any) -> CheckRecord:
    return CheckRecord(name, value, f"== {expected}", value == expected)


def _increasing(name: str, values: list[float]) -> CheckRecord:
    steps = np.diff(np.asarray(values))
    return CheckRecord(
        name, values, "strictly increasing", bool(np.all(steps > 0.0))
    )


def _checkRows(checks: list[CheckRecord]) -> list[ReportRow]:
    return [
        {
            "name": c.name,
            "value": c.value,
            "expected": c.expected,
            "passed": c.passed,
        }
        for c in checks
    ]


def _boundRows(report: BestConstantReport, label: str) -> list[ReportRow]:
    return [
        {
            "case": label,
            "side": entry.side,
            "value": entry.value,
            "provenance": entry.provenance.value,
            "detail": entry.detail,
        }
        for entry in (*report.lower, *report.upper)
    ]


# ---------------------------------------------------------------------------
# Example data
# ---------------------------------------------------------------------------


def _criticalDegree(n: int) -> float:
    return 2.0 * n / (n - 2)


def _sphere(n: int) -> ModelManifold:
    return ModelManifold(ManifoldKind.ROUND_SPHERE, n, label="round-sphere")


def _coordinateF(n: int) -> HomogeneousPotential:
    """|t_1|^(2*) + 1/2 |t_2|^(2*): maximized at e_1 with M_F = 1."""
    return coordinatePowerPotential_make([1.0, 0.5], _criticalDegree(n))


def _exampleG() -> SpatialPotential:
    """
    sum A_ij(x) |t_i| |t_j| with A_11 = 1 fixed, A_22 >= 1 and A_12 >= 0.
    """
    return absBilinearPotential_make(
        [
            [1.0, RadialCoefficient(0.25, 0.25, 1.0)],
            [RadialCoefficient(0.25, 0.25, 1.0), RadialCoefficient(1.5, 0.5)],
        ]
    )


def _identityG() -> SpatialPotential:
    return absBilinearPotential_make([[1.0, 0.0], [0.0, 1.0]])


def _vectorExtremal_check(
    prefix: str,
    n: int,
    F: HomogeneousPotential,
    G: SpatialPotential,
    report: BestConstantReport,
) -> list[CheckRecord]:
    """Residual and factorization of t0 u_beta with t0 a maximizer of F."""
    if report.exact is None:
        return [_is(f"{prefix}-extremal-needs-exact", None, "a value")]
    X_F = directionSphere_maximize(F)
    t0 = X_F.points[0] / np.linalg.norm(X_F.points[0])
    grid = radialGrid_make(_sphere(n), EXTREMAL_GRID_N)
    U = sphereExtremalProfile_build(
        SphereExtremalParams(n=n, beta=EXTREMAL_BETA, t0=t0), grid
    )
    residual = equalityResidual_compute(
        U,
        Inequality.VECTOR_OPTIMAL,
        A=report.A0_nF,
        B=report.exact,
        F=F,
        G=G,
    )
    factors = extremal_factorize(U, F, X_F)
    return [
        _atMost(
            f"{prefix}-extremal-residual", abs(residual), EXTREMAL_RESIDUAL
        ),
        _atMost(
            f"{prefix}-factor-deviation", factors.deviation, FACTOR_DEVIATION
        ),
        _is(f"{prefix}-factor-maximizing", factors.maximizing, True),
    ]


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def _example1(ctx: _Context) -> ScenarioOutcome:
    n = ctx.n or 4
    sphere = _sphere(n)
    grid = radialGrid_make(sphere, ctx.grid_N)
    omega = unitSphere_volume(n)
    checks: list[CheckRecord] = []

    F_l1 = lqPotential_make(1.0, _criticalDegree(n), 2)
    G_id = _identityG()
    report = b0Bounds_assemble(F_l1, G_id, sphere, grid)
    checks.append(_is("l1-pinch", report.exact is not None, True))
    checks.append(
        _within("l1-exact", report.exact, 2.0 * omega ** (-2.0 / n), PINCH_REL)
    )
    checks += _vectorExtremal_check("l1", n, F_l1, G_id, report)

    F_e1 = _coordinateF(n)
    G_x = _exampleG()
    spatial = b0Bounds_assemble(F_e1, G_x, sphere, grid)
    checks.append(_is("spatial-pinch", spatial.exact is not None, True))
    checks.append(
        _within("spatial-exact", spatial.exact, omega ** (-2.0 / n), PINCH_REL)
    )
    checks += _vectorExtremal_check("spatial", n, F_e1, G_x, spatial)

    on_sphere = dichotomy_classify(report, F_l1, G_id, sphere, ctx.tol, grid)
    torus = ModelManifold(ManifoldKind.FLAT_TORUS, n, side=1.0)
    torus_grid = radialGrid_make(torus, ctx.grid_N)
    torus_report = b0Bounds_assemble(F_l1, G_id, torus, torus_grid)
    on_torus = dichotomy_classify(
        torus_report, F_l1, G_id, torus, ctx.tol, torus_grid
    )
    checks.append(
        _is("sphere-verdict", on_sphere.verdict, Verdict.TOUCHES_WITHIN)
    )
    checks.append(
        _is("torus-verdict", on_torus.verdict, Verdict.STRICTLY_ABOVE)
    )
    return ScenarioOutcome(
        scenario=ScenarioId.EXAMPLE1,
        checks=tuple(checks),
        summary={
            "n": n,
            "exact_l1": report.exact,
            "exact_spatial": spatial.exact,
            "threshold_sup": on_sphere.threshold_sup,
            "sphere_verdict": on_sphere.verdict.value,
            "torus_verdict": on_torus.verdict.value,
        },
        tables={
            "bounds": _boundRows(report, "l1")
            + _boundRows(spatial, "spatial")
            + _boundRows(torus_report, "torus")
        },
    )


def _example2(ctx: _Context) -> ScenarioOutcome:
    n = ctx.n or 4
    sphere = _sphere(n)
    grid = radialGrid_make(sphere, ctx.grid_N)
    F = _coordinateF(n)
    G = absBilinearPotential_make([[2.0, 0.0], [0.0, 1.0]])
    t_max = np.array([1.0, 0.0])
    t_min = np.array([0.0, 1.0])
    L = rotation_make(t_min, t_max)
    F_aligned = potential_compose(F, L)

    before = b0Bounds_assemble(F, G, sphere, grid)
    after = b0Bounds_assemble(F_aligned, G, sphere, grid)
    aligned = directionSphere_maximize(F_aligned)
    overlap = float(np.max(np.abs(aligned.points @ t_min)))
    checks = [
        _is("unaligned-pinch", before.exact is not None, False),
        _within("aligned-maximizer", overlap, 1.0, 1e-9),
        _is("aligned-pinch", after.exact is not None, True),
        _within(
            "aligned-exact",
            after.exact,
            after.M_F ** (2.0 / _criticalDegree(n))
            * unitSphere_volume(n) ** (-2.0 / n)
            / after.m_G,
            PINCH_REL,
        ),
    ]
    checks += _vectorExtremal_check("aligned", n, F_aligned, G, after)
    return ScenarioOutcome(
        scenario=ScenarioId.EXAMPLE2,
        checks=tuple(checks),
        summary={
            "n": n,
            "rotation": L.tolist(),
            "unaligned_interval": [before.max_lower, before.min_upper],
            "exact": after.exact,
        },
        tables={
            "bounds": _boundRows(before, "unaligned")
            + _boundRows(after, "aligned")
        },
    )


def _example3(ctx: _Context) -> ScenarioOutcome:
    n = max(ctx.n or 4, 4)
    conformal = ModelManifold(
        ManifoldKind.CONFORMAL_SPHERE,
        n,
        conformal_factor=conformalFactor_spike(0.5, 0.5),
        label="conformal-sphere",
    )
    grid = radialGrid_make(conformal, ctx.grid_N)
    F = _coordinateF(n)
    G = _exampleG()
    report = b0Bounds_assemble(F, G, conformal, grid, conformal_exact=True)
    checks = [_is("pinch", report.exact is not None, True)]
    if report.B0_scalar is not None:
        checks.append(
            _within(
                "exact",
                report.exact,
                report.M_F ** (2.0 / _criticalDegree(n))
                * report.B0_scalar
                / report.m_G,
                PINCH_REL,
            )
        )
    geometric = report.bound(BoundProvenance.GEOMETRIC)
    if geometric is not None and report.exact is not None:
        checks.append(
            _within(
                "geometric-touches", geometric.value, report.exact, ctx.tol
            )
        )
    return ScenarioOutcome(
        scenario=ScenarioId.EXAMPLE3,
        checks=tuple(checks),
        summary={
            "n": n,
            "exact": report.exact,
            "B0_scalar": report.B0_scalar,
            "warnings": list(report.warnings),
        },
        tables={"bounds": _boundRows(report, "conformal")},
        note=EXAMPLE3_NOTE,
    )


def _example4(ctx: _Context) -> ScenarioOutcome:
    n = ctx.n or 4
    sphere = _sphere(n)
    grid = radialGrid_make(sphere, ctx.grid_N)
    F = _coordinateF(n)
    G = _identityG()
    report = b0Bounds_assemble(F, G, sphere, grid)
    verdict = dichotomy_classify(report, F, G, sphere, ctx.tol, grid)
    family = sphereExtremalFamily_make(
        n, ctx.betas, grid, t0=np.array([1.0, 0.0])
    )
    atoms = reverseHolder_check(family, F, report.A0_nF, ctx.deltas)
    checks = [
        _is("verdict", verdict.verdict, Verdict.TOUCHES_WITHIN),
        _is("blow-up", atoms.concentrating, True),
        _atLeast("nu1", atoms.nu1, NU_FLOOR),
        _atMost("nu1-mass", atoms.nu1, 1.0 + 1e-9),
        _atLeast("reverse-holder-margin", atoms.margin, MARGIN_FLOOR),
    ]
    members: list[ReportRow] = [
        {
            "beta": m.parameter,
            "sup": m.sup,
            "mu": m.mu,
            "f_total": m.f_total,
            "dirichlet_total": m.dirichlet_total,
        }
        for m in atoms.members
    ]
    return ScenarioOutcome(
        scenario=ScenarioId.EXAMPLE4,
        checks=tuple(checks),
        summary={
            "n": n,
            "verdict": verdict.verdict.value,
            "threshold_sup": verdict.threshold_sup,
            "nu1": atoms.nu1,
            "mu1": atoms.mu1,
            "margin": atoms.margin,
            "admissible_deltas": list(atoms.admissible_deltas),
            "warnings": [*verdict.warnings, *atoms.warnings],
        },
        tables={"members": members, "bounds": _boundRows(report, "sphere")},
    )


def _conformalFamily_member(
    n: int, alpha: float, mode: str, grid_N: int
) -> ModelManifold:
    height, width = float(np.sqrt(alpha)), 1.0 / alpha
    if mode == "source":

        def source(r: FloatArray) -> FloatArray:
            return 1.0 + height * np.exp(-((r / width) ** 2))

        factor = conformalFactor_solve(n, source, grid_N)
    else:
        factor = conformalFactor_spike(height, width)
    return ModelManifold(
        ManifoldKind.CONFORMAL_SPHERE,
        n,
        conformal_factor=factor,
        label=f"{mode}[alpha={alpha:g}]",
    )


def _example5(ctx: _Context) -> ScenarioOutcome:
    n = max(ctx.n or 4, 4)
    F = _coordinateF(n)
    G = _exampleG()
    round_report = b0Bounds_assemble(
        F, G, _sphere(n), radialGrid_make(_sphere(n), ctx.grid_N)
    )
    rows: list[ReportRow] = []
    max_S: list[float] = []
    lower: list[float] = []
    for alpha in EXAMPLE5_ALPHAS:
        M = _conformalFamily_member(n, alpha, ctx.example5_mode, ctx.grid_N)
        grid: RadialGrid = radialGrid_make(M, ctx.grid_N)
        report = b0Bounds_assemble(F, G, M, grid)
        geometric = report.bound(BoundProvenance.GEOMETRIC)
        max_S.append(float(scalarCurvature_profile(grid).max()))
        lower.append(float("nan") if geometric is None else geometric.value)
        rows.append(
            {
                "alpha": alpha,
                "max_S": max_S[-1],
                "geometric": lower[-1],
                "max_lower": report.max_lower,
            }
        )
        LOG(f"example5: alpha={alpha:g} max S={max_S[-1]:.6g}", 2)
    checks = [
        _increasing("max-S", max_S),
        _increasing("geometric-lower", lower),
        _atLeast("exceeds-round", lower[-1], round_report.min_upper),
    ]
    return ScenarioOutcome(
        scenario=ScenarioId.EXAMPLE5,
        checks=tuple(checks),
        summary={
            "n": n,
            "mode": ctx.example5_mode,
            "round_exact": round_report.exact,
        },
        tables={"family": rows},
    )


def _sphereIdentity(ctx: _Context) -> ScenarioOutcome:
    checks: list[CheckRecord] = []
    rows: list[ReportRow] = []
    for n in SPHERE_IDENTITY_DIMENSIONS:
        lhs = n * (n - 2) / 4.0 * a0Euclidean_compute(n)
        rhs = unitSphere_volume(n) ** (-2.0 / n)
        quadrature = b0ScalarSphere_compute(n, ctx.grid_N)
        checks.append(_within(f"identity-n{n}", lhs, rhs, SPHERE_IDENTITY_REL))
        rows.append(
            {
                "n": n,
                "lhs": lhs,
                "omega_power": rhs,
                "b0_quadrature": quadrature,
                "rel_error": abs(lhs - rhs) / rhs,
            }
        )
    return ScenarioOutcome(
        scenario=ScenarioId.SPHERE_IDENTITY,
        checks=tuple(checks),
        summary={"dimensions": list(SPHERE_IDENTITY_DIMENSIONS)},
        tables={"identity": rows},
    )


def _torusExistence(ctx: _Context) -> ScenarioOutcome:
    n = ctx.n or 4
    torus = ModelManifold(ManifoldKind.FLAT_TORUS, n, side=1.0)
    F = lqPotential_make(2.0, _criticalDegree(n), 2)
    G = spatialPotential_uniform(lqPotential_make(2.0, 2.0, 2))
    problem = VariationalProblem(
        manifold=torus,
        F=F,
        G=G,
        coeff_A=a0Vector_compute(n, F),
        coeff_B=TORUS_B,
    )
    result = problem_minimize(
        problem,
        SolverConfig(
            grid_N=ctx.grid_N,
            step=ctx.step,
            max_iters=ctx.max_iters,
            el_tol=ctx.el_tol,
            seed=ctx.seed,
        ),
    )
    volume = float(result.field.grid.quadrature.sum())
    expected = TORUS_B * volume ** (2.0 / n)
    factors = extremal_factorize(result.field, F)
    precheck = existence_precheck(problem, grid_N=ctx.grid_N)
    checks = [
        _is("converged", result.converged, True),
        _below("lambda", result.lam, 1.0),
        _atMost("el-residual", result.el_residual, EL_RESIDUAL),
        _within("lambda-oracle", result.lam, expected, TORUS_LAMBDA_REL),
        _atMost("factor-deviation", factors.deviation, FACTOR_DEVIATION),
        _is("precheck-below-one", precheck.below_one, True),
    ]
    history: list[ReportRow] = [
        {"iteration": i, "lam": h.lam, "residual": h.residual, "step": h.step}
        for i, h in enumerate(result.history)
    ]
    return ScenarioOutcome(
        scenario=ScenarioId.TORUS_EXISTENCE,
        checks=tuple(checks),
        summary={
            "n": n,
            "lam": result.lam,
            "el_residual": result.el_residual,
            "restart": result.restart,
            "iterations": result.iterations,
            "precheck_best": precheck.best_lambda,
            "warnings": list(result.warnings),
        },
        tables={"history": history},
    )


_SCENARIOS: dict[ScenarioId, Callable[[_Context], ScenarioOutcome]] = {
    ScenarioId.EXAMPLE1: _example1,
    ScenarioId.EXAMPLE2: _example2,
    ScenarioId.EXAMPLE3: _example3,
    ScenarioId.EXAMPLE4: _example4,
    ScenarioId.EXAMPLE5: _example5,
    ScenarioId.SPHERE_IDENTITY: _sphereIdentity,
    ScenarioId.TORUS_EXISTENCE: _torusExistence,
}


def scenario_run(
    scenario: ScenarioId | str, overrides: RunConfig | None = None
) -> ScenarioOutcome:
    """
    Run one example pipeline.

    Args:
        scenario: Scenario id.
        overrides: Run configuration; its numeric options and an
            explicitly set manifold dimension apply to the scenario.

    Returns:
        ScenarioOutcome with every check, pass or fail.
    """
    sid = ScenarioId(scenario)
    config = overrides if overrides is not None else RunConfig()
    outcome = _SCENARIOS[sid](_context(config))
    failed = sum(not check.passed for check in outcome.checks)
    LOG(
        f"scenario {sid.value}: {len(outcome.checks) - failed} passed, "
        f"{failed} failed",
        1,
    )
    return outcome


def scenario_assert(outcome: ScenarioOutcome) -> None:
    """
    Raises:
        ScenarioFailed: With the first failed check of the outcome.
    """
    failure = outcome.first_failure
    if failure is not None:
        raise ScenarioFailed(
            f"{outcome.scenario.value}: check '{failure.name}' failed "
            f"(value {failure.value!r}, expected {failure.expected})"
        )


def outcome_rows(outcome: ScenarioOutcome) -> list[ReportRow]:
    return _checkRows(list(outcome.checks))
