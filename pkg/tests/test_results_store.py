from __future__ import annotations

import json
import math

from core.types import ResultRow, RunLogRecord
from prod.provenance import git_revision, utc_timestamp
from prod.results_store import CSV_COLUMNS, read_rows, sidecar_path, write_rows, write_sidecar


def test_csv_cells(tmp_path):
    rows = [
        ResultRow("exp", "a", 0.1, None, None, 0.5, True, "le_bound"),
        ResultRow("exp", "b", 1.0, None, None, math.inf, True, "le_bound"),
        ResultRow("exp", "c", 0.25, 0.01, 0.3, None, False, "within_3se"),
    ]
    path = write_rows(rows, tmp_path / "nested" / "out.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "exp,a,0.10000000000000001,,,0.5,true,le_bound"
    assert lines[2].endswith(",inf,true,le_bound")
    assert read_rows(path) == rows


def test_sidecar_and_ledger(tmp_path):
    record = RunLogRecord(
        schema_version="1.0",
        timestamp_utc=utc_timestamp(),
        git_revision=git_revision(tmp_path),
        experiment_id="exp",
        command="walk-verify",
        seed=0,
        threads=1,
        rows=3,
        failed_rows=1,
        config={"command": "walk-verify"},
    )
    csv_path = tmp_path / "exp.csv"
    target = write_sidecar(record, csv_path)
    assert target == sidecar_path(csv_path)
    payload = json.loads(target.read_text(encoding="utf-8"))
    assert payload["experiment_id"] == "exp"
    assert payload["failed_rows"] == 1
    ledger = (tmp_path / "runs.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(ledger) == 1
    assert json.loads(ledger[0])["seed"] == 0


def test_git_revision_outside_a_repository(tmp_path):
    assert git_revision(tmp_path) is None
    assert utc_timestamp().endswith("Z")
