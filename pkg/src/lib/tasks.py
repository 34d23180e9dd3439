"""
Subcommand bodies

Every task takes a validated RunConfig and the input directory and returns
a ReportPayload. The scenario task additionally returns its outcome so the
caller can decide the exit status after the report is written.
"""

from __future__ import annotations

from pathlib import Path

from ..models.constants import BestConstantReport, ReferenceModel
from ..models.geometry import ManifoldKind, ModelManifold
from ..models.run import ReportPayload, ReportRow, RunConfig
from ..models.scenarios import ScenarioOutcome
from ..models.solver import SolverConfig, VariationalProblem
from .concentration import reverseHolder_check
from .constants import (
    a0Euclidean_compute,
    a0Vector_compute,
    b0Bounds_assemble,
    dichotomy_classify,
    referenceUpperBound_lookup,
)
from .extremals import (
    extremal_factorize,
    extremalSweep_tabulate,
    sphereExtremalFamily_make,
)
from .log import LOG
from .manifolds import radialGrid_make
from .potentials import directionSphere_maximize
from .runconfig import (
    ConfigError,
    manifold_build,
    potential_build,
    spatialPotential_build,
)
from .scenarios import outcome_rows, scenario_run
from .solver import existence_precheck, problem_minimize


def _boundTable(report: BestConstantReport) -> list[ReportRow]:
    return [
        {
            "side": entry.side,
            "value": entry.value,
            "provenance": entry.provenance.value,
            "detail": entry.detail,
        }
        for entry in (*report.lower, *report.upper)
    ]


def constants_task(config: RunConfig, inputdir: Path) -> ReportPayload:
    """Best constants, the bound table and the dichotomy verdict."""
    M = manifold_build(config.manifold, inputdir)
    F = potential_build(config.F, M.n, inputdir)
    G = spatialPotential_build(config.G, F.k)
    X_F = directionSphere_maximize(F)
    n = M.n
    reference: list[ReportRow] = [
        {"model": model.value, "value": referenceUpperBound_lookup(n, model)}
        for model in ReferenceModel
    ]
    if M.kind is ManifoldKind.EUCLIDEAN_BALL:
        A0_n = a0Euclidean_compute(n)
        return ReportPayload(
            summary={
                "n": n,
                "k": F.k,
                "A0_n": A0_n,
                "M_F": X_F.M_F,
                "A0_nF": a0Vector_compute(n, F, X_F),
                "warnings": ["second constants need a closed manifold"],
            },
            tables={"reference": reference},
        )

    grid = radialGrid_make(M, config.numeric.grid_N)
    report = b0Bounds_assemble(
        F,
        G,
        M,
        grid,
        conformal_exact=config.numeric.conformal_exact,
        X_F=X_F,
    )
    verdict = dichotomy_classify(report, F, G, M, config.numeric.tol, grid)
    return ReportPayload(
        summary={
            "n": report.n,
            "k": report.k,
            "A0_n": report.A0_n,
            "M_F": report.M_F,
            "A0_nF": report.A0_nF,
            "B0_scalar": report.B0_scalar,
            "m_G": report.m_G,
            "bounds": _boundTable(report),
            "exact": report.exact,
            "exact_reason": report.exact_reason,
            "inconsistent": report.inconsistent,
            "threshold_sup": verdict.threshold_sup,
            "verdict": verdict.verdict.value,
            "warnings": [*report.warnings, *verdict.warnings],
        },
        tables={"bounds": _boundTable(report), "reference": reference},
    )


def solve_task(config: RunConfig, inputdir: Path) -> ReportPayload:
    """
    Constrained minimization with the existence screen and factorization.

    Raises:
        ConfigError: If B is missing or the manifold is not closed.
    """
    if config.B is None:
        raise ConfigError("task 'solve' needs the coefficient B")
    M = manifold_build(config.manifold, inputdir)
    if not M.closed:
        raise ConfigError("task 'solve' needs a closed manifold")
    F = potential_build(config.F, M.n, inputdir)
    G = spatialPotential_build(config.G, F.k)
    A = config.A if config.A is not None else a0Vector_compute(M.n, F)
    problem = VariationalProblem(
        manifold=M, F=F, G=G, coeff_A=A, coeff_B=config.B
    )
    numeric = config.numeric
    result = problem_minimize(
        problem,
        SolverConfig(
            grid_N=numeric.grid_N,
            step=numeric.step,
            max_iters=numeric.max_iters,
            el_tol=numeric.el_tol,
            smoothing_eps=numeric.smoothing_eps,
            seed=numeric.seed,
        ),
    )
    precheck = existence_precheck(
        problem, normalization=numeric.normalization, grid_N=numeric.grid_N
    )
    factors = extremal_factorize(result.field, F)
    grid = result.field.grid
    profile: list[ReportRow] = []
    for i in range(grid.node_count):
        row: ReportRow = {"r": float(grid.r[i])}
        for j in range(F.k):
            row[f"u_{j + 1}"] = float(result.field.values[i, j])
        profile.append(row)
    history: list[ReportRow] = [
        {"iteration": i, "lam": h.lam, "residual": h.residual, "step": h.step}
        for i, h in enumerate(result.history)
    ]
    return ReportPayload(
        summary={
            "n": M.n,
            "k": F.k,
            "A": A,
            "B": config.B,
            "lam": result.lam,
            "el_residual": result.el_residual,
            "converged": result.converged,
            "iterations": result.iterations,
            "restart": result.restart,
            "smoothing_eps": result.smoothing_eps,
            "precheck": {
                "best_lambda": precheck.best_lambda,
                "below_one": precheck.below_one,
                "marginal": precheck.marginal,
                "normalization": precheck.normalization,
                "threshold": precheck.threshold,
            },
            "factorization": {
                "t0": factors.t0.tolist(),
                "deviation": factors.deviation,
                "maximizing": factors.maximizing,
            },
            "warnings": list(result.warnings),
        },
        tables={"profile": profile, "history": history},
    )


def _roundSphere(config: RunConfig) -> ModelManifold:
    return ModelManifold(ManifoldKind.ROUND_SPHERE, config.manifold.n)


def extremal_task(config: RunConfig, inputdir: Path) -> ReportPayload:
    """Sphere-extremal sweep with pole values, masses and residuals."""
    grid = radialGrid_make(_roundSphere(config), config.numeric.grid_N)
    rows = extremalSweep_tabulate(
        config.manifold.n, config.numeric.betas, grid
    )
    residuals = [abs(row.residual) for row in rows]
    return ReportPayload(
        summary={
            "n": config.manifold.n,
            "members": len(rows),
            "max_abs_residual": max(residuals, default=0.0),
        },
        tables={
            "extremal": [
                {
                    "beta": row.beta,
                    "pole_value": row.pole_value,
                    "f_mass": row.f_mass,
                    "residual": row.residual,
                }
                for row in rows
            ]
        },
    )


def concentration_task(config: RunConfig, inputdir: Path) -> ReportPayload:
    """Reverse-Hoelder atoms of the sphere-extremal family along t0 in X_F."""
    n = config.manifold.n
    F = potential_build(config.F, n, inputdir)
    X_F = directionSphere_maximize(F)
    t0 = X_F.best_point()
    grid = radialGrid_make(_roundSphere(config), config.numeric.grid_N)
    family = sphereExtremalFamily_make(n, config.numeric.betas, grid, t0)
    report = reverseHolder_check(
        family, F, a0Vector_compute(n, F, X_F), config.numeric.deltas
    )
    members: list[ReportRow] = []
    masses: list[ReportRow] = []
    for member in report.members:
        members.append(
            {
                "beta": member.parameter,
                "sup": member.sup,
                "mu": member.mu,
                "f_total": member.f_total,
                "dirichlet_total": member.dirichlet_total,
            }
        )
        masses += [
            {
                "beta": member.parameter,
                "delta": row.delta,
                "f_mass": row.f_mass,
                "dirichlet_mass": row.dirichlet_mass,
            }
            for row in member.rows
        ]
    return ReportPayload(
        summary={
            "n": n,
            "k": F.k,
            "concentrating": report.concentrating,
            "nu1": report.nu1,
            "mu1": report.mu1,
            "margin": report.margin,
            "admissible_deltas": list(report.admissible_deltas),
            "warnings": list(report.warnings),
        },
        tables={"members": members, "masses": masses},
    )


def scenario_task(
    config: RunConfig, inputdir: Path
) -> tuple[ReportPayload, ScenarioOutcome]:
    assert config.scenario is not None
    outcome = scenario_run(config.scenario, config)
    payload = ReportPayload(
        summary={
            **outcome.summary,
            "scenario": outcome.scenario.value,
            "passed": outcome.passed,
            "note": outcome.note,
        },
        tables={**outcome.tables, "checks": outcome_rows(outcome)},
    )
    return payload, outcome


def task_run(
    config: RunConfig, inputdir: Path
) -> tuple[ReportPayload, ScenarioOutcome | None]:
    """
    Dispatch a configuration to its task.

    Returns:
        The report payload, and the scenario outcome for scenario runs.
    """
    LOG(f"task '{config.task}'", 1)
    if config.task == "scenario":
        return scenario_task(config, inputdir)
    tasks = {
        "constants": constants_task,
        "solve": solve_task,
        "extremal": extremal_task,
        "concentration": concentration_task,
    }
    return tasks[config.task](config, inputdir), None
