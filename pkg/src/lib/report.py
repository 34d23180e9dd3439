"""
Deterministic report files

JSON reports hold the whole payload with sorted keys; CSV reports hold the
scalar part of the summary as key/value rows plus one file per table.
Floats are rounded to a fixed number of significant digits before either
writer sees them, so identical payloads give byte-identical files and the
two formats agree on every shared number. Non-finite floats become null
(JSON) or an empty cell (CSV).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from ..config import appsettings
from ..models.run import ReportFormat, ReportPayload, ReportRow
from .log import LOG


class ReportWriteError(OSError):
    """Raised when a report file cannot be written."""


def report_empty() -> ReportPayload:
    return ReportPayload(summary={}, tables={})


def value_clean(value: Any, digits: int | None = None) -> Any:
    """
    Convert a value into plain JSON types with rounded floats.

    Handles numpy scalars and arrays, enums, dataclasses, tuples and nested
    mappings. Mapping keys are stringified.
    """
    places = appsettings.report_digits if digits is None else digits
    if isinstance(value, Enum):
        return value_clean(value.value, places)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{places}g}")
    if isinstance(value, np.ndarray):
        return [value_clean(item, places) for item in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return value_clean(dataclasses.asdict(value), places)
    if isinstance(value, Mapping):
        return {str(k): value_clean(v, places) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [value_clean(item, places) for item in value]
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{appsettings.report_digits}g}"
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def _fieldnames(rows: list[ReportRow]) -> list[str]:
    names: dict[str, None] = {}
    for row in rows:
        for key in row:
            names.setdefault(key, None)
    return list(names)


def _rowsCsv_write(
    path: Path, rows: list[ReportRow], fieldnames: list[str] | None = None
) -> Path:
    if fieldnames is None:
        fieldnames = _fieldnames(rows)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(
            f,
            fieldnames=fieldnames,
            extrasaction="ignore",
            lineterminator="\n",
        )
        if fieldnames:
            writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in fieldnames})
    return path


def report_emit(
    payload: ReportPayload, fmt: ReportFormat, out_dir: Path, stem: str
) -> list[Path]:
    """
    Write a report payload.

    Args:
        payload: Summary and tables of one run.
        fmt: "json" or "csv".
        out_dir: Report directory, created when missing.
        stem: Base file name.

    Returns:
        Paths written, in writing order.

    Raises:
        ReportWriteError: If the directory or a file cannot be written.
    """
    clean = value_clean(payload)
    written: list[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            path = out_dir / f"{stem}.json"
            text = json.dumps(clean, sort_keys=True, indent=2)
            path.write_text(text + "\n", encoding="utf-8")
            written.append(path)
        else:
            scalars = [
                {"key": key, "value": value}
                for key, value in sorted(clean["summary"].items())
                if not isinstance(value, (list, dict))
            ]
            written.append(
                _rowsCsv_write(
                    out_dir / f"{stem}_summary.csv", scalars, ["key", "value"]
                )
            )
            for name in sorted(clean["tables"]):
                written.append(
                    _rowsCsv_write(
                        out_dir / f"{stem}_{name}.csv", clean["tables"][name]
                    )
                )
    except OSError as e:
        raise ReportWriteError(f"cannot write report to {out_dir}: {e}") from e
    LOG(f"report: {len(written)} file(s) in {out_dir}", 2)
    return written
