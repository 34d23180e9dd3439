"""
Program state model and pipeline helper

Defines ProgramState dataclass for the functional pipeline pattern and
the pipeline() helper for composing transformation stages.
"""

import dataclasses
from argparse import Namespace
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import TypeVar

from .run import ReportPayload, RunConfig

PS = TypeVar("PS", bound="ProgramState")


@dataclass
class ProgramState:
    """
    Central state container for one laboratory run (state bus pattern).

    Pipeline stages and their state additions:
        - Initial: inputdir, outputdir, verbosity and the CLI overrides
        - env_check: configPath, envOK
        - config_load: runConfig
        - task_run: payload, failure
        - report_write: reportFiles
        - results_report: (no additions, terminal stage)

    Attributes:
        inputdir: Directory holding the run file and referenced tables.
        outputdir: Report directory.
        verbosity: Logging verbosity level (1-3).
        task: Subcommand override.
        scenario: Scenario id override.
        configFile: YAML run file, relative to inputdir.
        reportFormat: Report format override.
        seed: Random seed override.
        grid: Grid interval override.
        tol: Verdict tolerance override.
        manifold: Manifold kind override.
        n: Manifold dimension override.
        k: Codomain dimension override.
        F: Preset name of F.
        G: Preset name of G.
        A: Gradient coefficient override.
        B: Potential coefficient override.
        envOK: Environment validation passed.
        configPath: Resolved run file, when one was named.
        runConfig: Validated run configuration.
        payload: Report payload of the task.
        failure: First failed scenario check, formatted for stderr.
        reportFiles: Files written by report_write.
    """

    # CLI arguments
    inputdir: Path | None = field(default=None)
    outputdir: Path | None = field(default=None)
    verbosity: int = field(default=1)
    task: str | None = field(default=None)
    scenario: str | None = field(default=None)
    configFile: str | None = field(default=None)
    reportFormat: str | None = field(default=None)
    seed: int | None = field(default=None)
    grid: int | None = field(default=None)
    tol: float | None = field(default=None)
    manifold: str | None = field(default=None)
    n: int | None = field(default=None)
    k: int | None = field(default=None)
    F: str | None = field(default=None)
    G: str | None = field(default=None)
    A: float | None = field(default=None)
    B: float | None = field(default=None)

    # Pipeline state
    envOK: bool = field(default=False)
    configPath: Path | None = field(default=None)
    runConfig: RunConfig | None = field(default=None)
    payload: ReportPayload | None = field(default=None)
    failure: str | None = field(default=None)
    reportFiles: list[Path] = field(default_factory=list)

    @classmethod
    def state_createFromNamespace(
        cls: type["ProgramState"],
        options: Namespace,
        inputdir: Path,
        outputdir: Path,
    ) -> "ProgramState":
        """
        Create ProgramState from argparse Namespace and directory paths.

        Namespace entries without a matching field are dropped.

        Args:
            options: Parsed CLI arguments.
            inputdir: Directory holding run inputs.
            outputdir: Directory for reports.

        Returns:
            ProgramState instance with all CLI options as attributes.
        """
        valid_fields = {f.name for f in dataclasses.fields(cls)}
        filtered_options = {
            k: v for k, v in vars(options).items() if k in valid_fields
        }
        return cls(
            **{
                **filtered_options,
                "inputdir": inputdir,
                "outputdir": outputdir,
            }
        )

    def copy(self: PS) -> PS:
        """
        Creates a shallow copy of the ProgramState instance.

        Returns:
            A new ProgramState instance.
        """
        return type(self)(**self.__dict__)

    def overrides(self) -> dict[str, object]:
        """
        Nested RunConfig mapping of the flags that were given.

        Flags left at None are omitted so run file values survive.
        """
        top: dict[str, object] = {}
        manifold: dict[str, object] = {}
        numeric: dict[str, object] = {}
        for key, value in (
            ("task", self.task),
            ("scenario", self.scenario),
            ("format", self.reportFormat),
            ("A", self.A),
            ("B", self.B),
        ):
            if value is not None:
                top[key] = value
        if self.manifold is not None:
            manifold["kind"] = self.manifold
        if self.n is not None:
            manifold["n"] = self.n
        for key, value in (
            ("seed", self.seed),
            ("grid_N", self.grid),
            ("tol", self.tol),
        ):
            if value is not None:
                numeric[key] = value
        if manifold:
            top["manifold"] = manifold
        if numeric:
            top["numeric"] = numeric
        for key, kind in (("F", self.F), ("G", self.G)):
            if kind is not None:
                top[key] = {"kind": kind}
        if self.k is not None:
            F = top.setdefault("F", {})
            assert isinstance(F, dict)
            F["k"] = self.k
        return top


def pipeline(
    initial_state: ProgramState,
    *stages: Callable[[ProgramState], ProgramState],
) -> ProgramState:
    """
    Execute a functional pipeline of state transformations.

    Each stage is a function (ProgramState) -> ProgramState that receives
    the output of the previous stage and returns a new state.

    Example:
        final_state = pipeline(
            initial_state,
            env_check,
            config_load,
            task_run,
            report_write,
            results_report,
        )

    This is equivalent to:
        results_report(report_write(task_run(config_load(env_check(s)))))
    """
    return reduce(lambda state, stage: stage(state), stages, initial_state)
