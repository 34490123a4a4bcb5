from __future__ import annotations

import math

import pytest

from lab.metrics import evaluate_rule, make_row, recheck, summarize


@pytest.mark.parametrize(
    "kwargs, expected",
    [
        ({"rule": "le_bound", "value": 0.5, "bound": 0.5}, True),
        ({"rule": "le_bound", "value": 0.5 + 1e-9, "bound": 0.5}, True),
        ({"rule": "le_bound", "value": 0.6, "bound": 0.5}, False),
        ({"rule": "le_bound", "value": 3.0, "bound": math.inf}, True),
        ({"rule": "le_bound", "value": math.nan, "bound": 1.0}, False),
        ({"rule": "le_bound", "value": 0.1}, False),
        ({"rule": "within_3se", "value": 1.02, "stderr": 0.01, "reference_value": 1.0}, True),
        ({"rule": "within_3se", "value": 1.05, "stderr": 0.01, "reference_value": 1.0}, False),
        ({"rule": "within_3se", "value": 1.0, "stderr": 0.0, "reference_value": 1.0}, True),
        ({"rule": "equals", "value": 0.2, "reference_value": 0.2}, True),
        ({"rule": "equals", "value": 0.21, "reference_value": 0.2}, False),
        ({"rule": "equals", "value": 1e-11, "reference_value": 0.0, "bound": 1e-10}, True),
        ({"rule": "equals", "value": 1e-15, "reference_value": 0.0, "bound": 0.0}, False),
        ({"rule": "flag", "value": 0.0, "flag": False}, False),
        ({"rule": "flag", "value": 0.0}, True),
    ],
)
def test_evaluate_rule(kwargs, expected):
    assert evaluate_rule(**kwargs) is expected


def test_make_row_and_recheck():
    row = make_row("exp", "stat", 0.3, "le_bound", bound=0.25)
    assert not row.passed
    assert row.stderr is None
    assert recheck(row) is False
    flagged = make_row("exp", "flag", 1.0, "flag", flag=False)
    assert recheck(flagged) is False


def test_summarize():
    rows = [
        make_row("exp", "a", 0.1, "le_bound", bound=1.0),
        make_row("exp", "b", 2.0, "le_bound", bound=1.0),
        make_row("exp", "c", 0.0, "flag"),
    ]
    summary = summarize(rows)
    assert summary["rows"] == 3
    assert summary["failed"] == 1
    assert summary["failed_statistics"] == ["b"]
    assert summary["pass_rate"] == pytest.approx(2.0 / 3.0)
    assert summarize([])["pass_rate"] == 1.0
