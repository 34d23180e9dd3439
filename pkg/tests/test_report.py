"""
Report writer tests

JSON and CSV reports must be deterministic and agree on every number.
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from sobolevlab.lib.report import (
    ReportWriteError,
    report_emit,
    report_empty,
    value_clean,
)
from sobolevlab.models.constants import Verdict
from sobolevlab.models.run import ReportPayload


def payload() -> ReportPayload:
    return ReportPayload(
        summary={
            "n": 4,
            "lam": 1.0 / 3.0,
            "verdict": Verdict.TOUCHES_WITHIN.value,
            "missing": None,
            "warnings": ["indicative"],
        },
        tables={
            "history": [
                {"iteration": 0, "lam": 0.5, "residual": float("nan")},
                {"iteration": 1, "lam": 0.25, "residual": 1e-9},
            ]
        },
    )


class TestValueClean:
    """Conversion into plain JSON types"""

    def test_rounding(self) -> None:
        assert value_clean(1.0 / 3.0, 4) == 0.3333

    def test_non_finite(self) -> None:
        assert value_clean(float("nan")) is None
        assert value_clean(np.float64("inf")) is None

    def test_numpy_and_enums(self) -> None:
        cleaned = value_clean(
            {"t0": np.array([0.6, 0.8]), "v": Verdict.STRICTLY_ABOVE}
        )
        assert cleaned == {"t0": [0.6, 0.8], "v": "StrictlyAbove"}

    def test_numpy_scalars(self) -> None:
        assert value_clean(np.int64(3)) == 3
        assert value_clean(np.bool_(True)) is True

    def test_tuple_keys_stringified(self) -> None:
        assert value_clean({1: (2.0, 3.0)}) == {"1": [2.0, 3.0]}


class TestJsonReport:
    def test_written_sorted(self, tmp_path: Path) -> None:
        files = report_emit(payload(), "json", tmp_path, "solve")
        assert files == [tmp_path / "solve.json"]
        data = json.loads(files[0].read_text(encoding="utf-8"))
        assert list(data["summary"]) == sorted(data["summary"])
        assert data["summary"]["lam"] == pytest.approx(1.0 / 3.0)
        assert data["tables"]["history"][0]["residual"] is None

    def test_deterministic(self, tmp_path: Path) -> None:
        first = report_emit(payload(), "json", tmp_path / "a", "run")[0]
        second = report_emit(payload(), "json", tmp_path / "b", "run")[0]
        assert first.read_bytes() == second.read_bytes()

    def test_empty(self, tmp_path: Path) -> None:
        path = report_emit(report_empty(), "json", tmp_path, "empty")[0]
        assert json.loads(path.read_text(encoding="utf-8")) == {
            "summary": {},
            "tables": {},
        }


class TestCsvReport:
    def test_files(self, tmp_path: Path) -> None:
        files = report_emit(payload(), "csv", tmp_path, "solve")
        assert [f.name for f in files] == [
            "solve_summary.csv",
            "solve_history.csv",
        ]

    def test_summary_scalars_only(self, tmp_path: Path) -> None:
        path = report_emit(payload(), "csv", tmp_path, "solve")[0]
        with path.open(newline="", encoding="utf-8") as handle:
            rows = {row["key"]: row["value"] for row in csv.DictReader(handle)}
        assert "warnings" not in rows
        assert rows["missing"] == ""
        assert float(rows["lam"]) == pytest.approx(1.0 / 3.0)

    def test_formats_agree(self, tmp_path: Path) -> None:
        json_path = report_emit(payload(), "json", tmp_path, "run")[0]
        table = report_emit(payload(), "csv", tmp_path, "run")[1]
        data = json.loads(json_path.read_text(encoding="utf-8"))
        with table.open(newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [float(r["lam"]) for r in rows] == [
            row["lam"] for row in data["tables"]["history"]
        ]
        assert rows[0]["residual"] == ""

    def test_unwritable(self, tmp_path: Path) -> None:
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        with pytest.raises(ReportWriteError, match="cannot write"):
            report_emit(payload(), "csv", blocker, "run")
