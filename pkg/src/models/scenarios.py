"""
Scenario outcome models
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .run import ReportRow, ScenarioId


@dataclass(frozen=True)
class CheckRecord:
    """
    One pass/fail assertion of a scenario.

    Attributes:
        name: Short identifier, stable across runs.
        value: Observed value.
        expected: Human-readable criterion, e.g. "<= 1e-06".
        passed: Whether the criterion holds.
    """

    name: str
    value: Any
    expected: str
    passed: bool


@dataclass(frozen=True)
class ScenarioOutcome:
    scenario: ScenarioId
    checks: tuple[CheckRecord, ...]
    summary: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, list[ReportRow]] = field(default_factory=dict)
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def first_failure(self) -> CheckRecord | None:
        for check in self.checks:
            if not check.passed:
                return check
        return None
