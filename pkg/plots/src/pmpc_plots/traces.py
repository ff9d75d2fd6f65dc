"""Schema-validated loaders for the simulator's file formats.

The file contracts are fixed by the simulation harness: ``trace.csv`` with
a documented column set (floats plus 0/1 booleans) and ``summary.json``
with per-value aggregates. Loading is strict - a missing or unknown
column is an error naming it, never a guess.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """The input file does not match the documented contract."""


TRACE_COLUMNS = (
    "t",
    "x_true",
    "y",
    "u",
    "pf_mean",
    "pf_q025",
    "pf_q975",
    "ess",
    "stage_cost",
    "constraint_ok",
    "fallback_used",
    "degenerate_flag",
)

_BOOL_COLUMNS = {"constraint_ok", "fallback_used", "degenerate_flag"}


@dataclass
class TraceFile:
    """Parsed trace: one list per column, rows aligned by index."""

    path: Path
    columns: dict[str, list]

    def __len__(self) -> int:
        return len(self.columns["t"])

    def __getitem__(self, name: str) -> list:
        return self.columns[name]


def load_trace(path) -> TraceFile:
    """Read and validate a trace.csv file.

    Raises:
        FileNotFoundError: no such file.
        SchemaError: missing/unknown columns (named) or unparsable cells.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a trace header")
        header = list(reader.fieldnames)
        missing = [c for c in TRACE_COLUMNS if c not in header]
        unknown = [c for c in header if c not in TRACE_COLUMNS]
        if missing:
            raise SchemaError(f"{path}: missing trace columns {missing}")
        if unknown:
            raise SchemaError(f"{path}: unknown trace columns {unknown}")
        columns: dict[str, list] = {name: [] for name in TRACE_COLUMNS}
        for i, row in enumerate(reader):
            try:
                for name in TRACE_COLUMNS:
                    cell = row[name]
                    if name == "t":
                        columns[name].append(int(cell))
                    elif name in _BOOL_COLUMNS:
                        columns[name].append(bool(int(cell)))
                    else:
                        columns[name].append(float(cell))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad value in data row {i}: {exc}") from exc
    return TraceFile(path=path, columns=columns)


def load_summary(path) -> dict:
    """Read and validate a sweep summary.json file."""
    path = Path(path)
    with open(path) as fh:
        try:
            summary = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(summary, dict) or "axis" not in summary or "values" not in summary:
        raise SchemaError(f"{path}: summary must be an object with 'axis' and 'values'")
    for i, entry in enumerate(summary["values"]):
        for key in ("value", "violation_count", "total_realized_cost"):
            if key not in entry:
                raise SchemaError(f"{path}: summary entry {i} is missing {key!r}")
        for key in ("violation_count", "total_realized_cost"):
            stats = entry[key]
            if not isinstance(stats, dict) or {"mean", "min", "max"} - set(stats):
                raise SchemaError(
                    f"{path}: summary entry {i} field {key!r} needs mean/min/max"
                )
    return summary
