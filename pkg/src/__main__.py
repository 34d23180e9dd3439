#!/usr/bin/env python3
"""
sobolevlab - Numerical laboratory for sharp Riemannian L2-Sobolev inequalities
of potential type

Computes the best first and second constants of vector-valued Sobolev
inequalities whose nonlinearity is a homogeneous potential F and whose zero
order term is a spatial potential G, checks extremal maps, runs a
constrained minimizer and measures concentration of blow-up families.

As an aside, this codebase leverages the ChRIS "plugin" concept/pattern as
general purpose python app development framework.

Usage:
    sobolevlab inputdir/ outputdir/ --task constants --n 4 --k 2 --F lq1

    Reports are written to outputdir/ as JSON (default) or CSV.

Examples:
    # Best constants for the l1 potential on the round 4-sphere
    sobolevlab . out/ --task constants --n 4 --k 2 --F lq1

    # Constrained minimization on a flat torus
    sobolevlab . out/ --task solve --manifold flat-torus --k 2 --B 0.5

    # Run an example pipeline from a YAML run file, CSV reports
    sobolevlab inputs/ out/ --config run.yaml --task scenario \\
        --scenario example4 --format csv -vv
"""

import sys
from argparse import ArgumentDefaultsHelpFormatter, ArgumentParser, Namespace
from pathlib import Path

from chris_plugin import chris_plugin

from .lib import LOG, __version__, state_connectToLogger
from .lib.report import ReportWriteError, report_emit
from .lib.runconfig import (
    F_PRESETS,
    G_PRESETS,
    ConfigError,
    runConfig_build,
    runConfig_read,
)
from .lib.scenarios import ScenarioFailed, scenario_assert
from .lib.tasks import task_run as task_dispatch
from .models import ProgramState, ScenarioId, pipeline

DISPLAY_TITLE = r"""
           _           _           _       _
  ___  ___| |__   ___ | | _____   _| | __ _| |__
 / __|/ _ \ '_ \ / _ \| |/ _ \ \ / / |/ _` | '_ \
 \__ \ (_) | |_) | (_) | |  __/\ V /| | (_| | |_) |
 |___/\___/|_.__/ \___/|_|\___| \_/ |_|\__,_|_.__/

  Sharp L2-Sobolev constants of potential type
"""

# Define CLI arguments
parser = ArgumentParser(
    description=(
        "sobolevlab - best constants, extremals and concentration for "
        "vector-valued Sobolev inequalities of potential type"
    ),
    formatter_class=ArgumentDefaultsHelpFormatter,
)

parser.add_argument(
    "--task",
    default=None,
    choices=["constants", "solve", "extremal", "concentration", "scenario"],
    help="Subcommand to run (run file value, else constants)",
)

parser.add_argument(
    "--scenario",
    default=None,
    choices=[sid.value for sid in ScenarioId],
    help="Example pipeline for --task scenario",
)

parser.add_argument(
    "--config",
    dest="configFile",
    default=None,
    type=str,
    help="YAML run file (relative to inputdir)",
)

parser.add_argument(
    "--format",
    dest="reportFormat",
    default=None,
    choices=["json", "csv"],
    help="Report format (run file value, else json)",
)

parser.add_argument(
    "--seed", default=None, type=int, help="Seed of random restarts"
)

parser.add_argument(
    "--grid",
    default=None,
    type=int,
    help="Radial grid intervals (even, >= 16)",
)

parser.add_argument(
    "--tol",
    default=None,
    type=float,
    help="Relative tolerance of the dichotomy verdict",
)

parser.add_argument(
    "--manifold",
    default=None,
    choices=[
        "round-sphere",
        "flat-torus",
        "conformal-sphere",
        "euclidean-ball",
    ],
    help="Model manifold (conformal spheres need a run file factor)",
)

parser.add_argument(
    "--n", default=None, type=int, help="Manifold dimension, >= 3"
)

parser.add_argument(
    "--k", default=None, type=int, help="Codomain dimension of the maps"
)

parser.add_argument(
    "--F",
    default=None,
    choices=sorted(F_PRESETS),
    help="Preset degree-2* potential",
)

parser.add_argument(
    "--G",
    default=None,
    choices=sorted(G_PRESETS),
    help="Preset degree-2 spatial potential",
)

parser.add_argument(
    "--A",
    default=None,
    type=float,
    help="Gradient coefficient (defaults to A0(n, F))",
)

parser.add_argument(
    "--B",
    default=None,
    type=float,
    help="Potential coefficient, required by --task solve",
)

parser.add_argument(
    "-v",
    "--verbosity",
    action="count",
    default=1,
    help="Increase output verbosity (can be repeated: -v, -vv, -vvv)",
)

parser.add_argument(
    "-V", "--version", action="version", version=f"%(prog)s {__version__}"
)


def env_check(inputstate: ProgramState) -> ProgramState:
    """
    Validate directories and resolve the run file.

    Returns:
        ProgramState with added fields:
            - configPath: Resolved run file, when --config was given
            - envOK: True if environment is valid

    Exits:
        2 if the input directory or the run file is missing
    """
    state = inputstate.copy()

    if state.verbosity >= 2:
        LOG(DISPLAY_TITLE, level=2)

    LOG("Checking environment...", level=2)

    assert state.inputdir is not None, "inputdir must be set"
    if not state.inputdir.is_dir():
        print(
            f"Error: Input directory not found: {state.inputdir}",
            file=sys.stderr,
        )
        sys.exit(2)

    if state.configFile:
        config_path = state.inputdir / state.configFile
        if not config_path.is_file():
            print(
                f"Error: Run file not found: {config_path}", file=sys.stderr
            )
            sys.exit(2)
        state.configPath = config_path
        LOG(f"Run file: {config_path}", level=2)

    assert state.outputdir is not None, "outputdir must be set"
    state.outputdir.mkdir(parents=True, exist_ok=True)
    LOG(f"Report directory: {state.outputdir}", level=2)

    state.envOK = True
    return state


def config_load(inputstate: ProgramState) -> ProgramState:
    """
    Read the run file and merge command-line overrides on top.

    Returns:
        ProgramState with added field:
            - runConfig: Validated RunConfig

    Exits:
        2 on an unreadable or invalid configuration
    """
    state = inputstate.copy()

    LOG("Loading run configuration...", level=1)
    try:
        data = runConfig_read(state.configPath) if state.configPath else {}
        state.runConfig = runConfig_build(data, state.overrides())
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        sys.exit(2)
    return state


def task_run(inputstate: ProgramState) -> ProgramState:
    """
    Run the configured task.

    A failed scenario check is recorded rather than raised so the report
    is still written.

    Returns:
        ProgramState with added fields:
            - payload: Report payload
            - failure: First failed scenario check, if any

    Exits:
        2 on a configuration the task cannot use
        1 on any other domain error
    """
    state = inputstate.copy()
    assert state.runConfig is not None and state.inputdir is not None

    try:
        state.payload, outcome = task_dispatch(
            state.runConfig, state.inputdir
        )
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        sys.exit(2)
    except (ValueError, RuntimeError, ArithmeticError) as e:
        print(f"Error: {type(e).__name__}: {e}", file=sys.stderr)
        if state.verbosity >= 3:
            import traceback

            traceback.print_exc()
        sys.exit(1)

    if outcome is not None:
        try:
            scenario_assert(outcome)
        except ScenarioFailed as e:
            state.failure = str(e)
    return state


def _reportStem(state: ProgramState) -> str:
    assert state.runConfig is not None
    if state.runConfig.task == "scenario":
        assert state.runConfig.scenario is not None
        return f"scenario_{state.runConfig.scenario.value}"
    return state.runConfig.task


def report_write(inputstate: ProgramState) -> ProgramState:
    """
    Write the payload into the report directory.

    Returns:
        ProgramState with added field:
            - reportFiles: Paths written

    Exits:
        1 if a report file cannot be written
    """
    state = inputstate.copy()
    assert state.payload is not None and state.runConfig is not None
    assert state.outputdir is not None

    LOG("Writing report...", level=2)
    try:
        state.reportFiles = report_emit(
            state.payload,
            state.runConfig.format,
            state.outputdir,
            _reportStem(state),
        )
    except ReportWriteError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    return state


def results_report(inputstate: ProgramState) -> ProgramState:
    """
    Summarize the run and set the exit status.

    Returns:
        ProgramState unchanged (terminal pipeline stage)

    Exits:
        1 if a scenario check failed
    """
    state: ProgramState = inputstate.copy()

    LOG(f"Report files: {len(state.reportFiles)}", level=1)
    for path in state.reportFiles:
        LOG(f"  {path}", level=1)

    if state.failure:
        print(f"Scenario failed: {state.failure}", file=sys.stderr)
        sys.exit(1)
    return state


@chris_plugin(
    parser=parser,
    title="sobolevlab - sharp potential-type Sobolev inequalities",
    category="Analysis",
    min_memory_limit="500Mi",
    min_cpu_limit="1000m",
)
def main(options: Namespace, inputdir: Path, outputdir: Path) -> None:
    """
    Main entry point - run one task and write its report.

    Orchestrates the pipeline:
        1. env_check: Validate directories and the run file
        2. config_load: Build the RunConfig from file and flags
        3. task_run: Compute the task's payload
        4. report_write: Emit JSON or CSV reports
        5. results_report: Summarize and set the exit status

    Args:
        options: CLI arguments from argparse
        inputdir: Directory holding the run file and referenced tables
        outputdir: Directory where reports will be written

    Note:
        This function is wrapped by @chris_plugin which handles CLI
        argument parsing and invokes this function with parsed values.
    """
    state: ProgramState = ProgramState.state_createFromNamespace(
        options=options, inputdir=inputdir, outputdir=outputdir
    )

    # Connect state to logger for entire pipeline
    state_connectToLogger(state)

    pipeline(
        state, env_check, config_load, task_run, report_write, results_report
    )


if __name__ == "__main__":
    main()  # type: ignore  # @chris_plugin decorator transforms signature
