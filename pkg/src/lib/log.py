"""
Centralized logging using Loguru with context-aware verbosity.

Numerical modules report progress through LOG() without carrying the CLI
state around: the pipeline connects its ProgramState once and every LOG()
call made underneath picks up the requested verbosity. Library callers and
tests never connect a state, so the numerical core stays silent for them.

Warnings that belong in a report (dichotomy caveats for small n, solver
non-convergence, optional modes in use) go through warning_emit(), which
both logs them and appends them to the report's warning list.

Usage:
    from sobolevlab.lib.log import LOG, state_connectToLogger

    state_connectToLogger(state)
    LOG("Assembling bound table", level=2)
    LOG("slice lower bound at t0=(0.7071, 0.7071): 0.3873", level=3)
"""

import sys
from contextvars import ContextVar
from typing import Any

from loguru import logger

# Context variable to hold current ProgramState
_program_state: ContextVar[Any | None] = ContextVar(
    "program_state", default=None
)

logger_format = (
    "<green>{time:HH:mm:ss}</green> │ "
    "<level>{level: <5}</level> │ "
    "<cyan>{function: <24}</cyan> @ "
    "<cyan>{line: <4}</cyan> ║ "
    "<level>{message}</level>"
)

logger.remove()
logger.add(sys.stderr, format=logger_format, level="DEBUG")


def state_connectToLogger(state: Any) -> None:
    """
    Connect a ProgramState to the logging context.

    Args:
        state: ProgramState instance with a verbosity attribute.
    """
    _program_state.set(state)


def LOG(message: str, level: int = 1, **kwargs: Any) -> None:
    """
    Log message if current state's verbosity allows.

    Args:
        message: Log message to display
        level: Minimum verbosity level required (1=normal, 2=verbose, 3=debug)
        **kwargs: Additional loguru metadata.

    Verbosity levels:
        1 = Task summaries (default)
        2 = Stage progress and per-member sweeps (-v)
        3 = Numerical detail: bracket steps, line searches (-vv)
    """
    state: Any | None = _program_state.get()

    if state and hasattr(state, "verbosity") and state.verbosity >= level:
        # depth=1 attributes records to LOG() callers.
        logger.opt(depth=1).debug(message, **kwargs)


def warning_emit(message: str, sink: list[str]) -> None:
    """
    Record a report warning and log it at normal verbosity.

    Args:
        message: Warning text as it should appear in the report.
        sink: Warning list of the report being assembled; appended in place.
    """
    sink.append(message)
    state: Any | None = _program_state.get()
    if state and hasattr(state, "verbosity") and state.verbosity >= 1:
        logger.opt(depth=1).warning(message)
