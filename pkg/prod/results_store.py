"""Result persistence: CSV tables and provenance sidecars.

This module owns file formats so the CLI never writes CSV or JSON directly.
Floats are written with 17 significant digits, so equal rows give equal bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import fields
from pathlib import Path

from core.logger import RunLogger
from core.types import ResultRow, RunLogRecord

RESULTS_DIR = Path("results")
CSV_COLUMNS = [f.name for f in fields(ResultRow)]


def default_output_path(experiment_id: str) -> Path:
    return RESULTS_DIR / f"{experiment_id}.csv"


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def write_rows(rows: list[ResultRow], path: str | Path) -> Path:
    """Write rows as CSV in `ResultRow` field order.

    Input contract:
    - `path` parent directory is creatable.

    Output contract:
    - Returns the written path; `None` fields become empty cells.

    Side effects:
    - Creates parent directories and overwrites `path`.
    """

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, column)) for column in CSV_COLUMNS])
    return target


def _parse_float(text: str) -> float | None:
    return None if text == "" else float(text)


def read_rows(path: str | Path) -> list[ResultRow]:
    """Read a CSV written by `write_rows`."""

    with Path(path).open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        return [
            ResultRow(
                experiment_id=record["experiment_id"],
                statistic_name=record["statistic_name"],
                value=float(record["value"]),
                stderr=_parse_float(record["stderr"]),
                reference_value=_parse_float(record["reference_value"]),
                bound=_parse_float(record["bound"]),
                passed=record["passed"] == "true",
                rule=record["rule"],  # type: ignore[arg-type]
            )
            for record in reader
        ]


def write_sidecar(record: RunLogRecord, csv_path: str | Path) -> Path:
    """Write the provenance sidecar next to `csv_path` and append the run ledger."""

    target = sidecar_path(csv_path)
    RunLogger(ledger_path=Path(csv_path).parent / "runs.jsonl").log_run(record, target)
    return target
