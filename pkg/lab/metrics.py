"""Result-row construction and run summaries.

Every row declares the rule that derives `passed` from its numeric fields,
so a CSV can be re-checked without rerunning the experiment.
"""

from __future__ import annotations

import math
from typing import TypedDict

from config.loader import get_settings
from core.types import ComparisonRule, ResultRow


class MetricsSummary(TypedDict):
    """Output schema for a run summary."""

    rows: int
    failed: int
    pass_rate: float
    failed_statistics: list[str]


def evaluate_rule(
    rule: ComparisonRule,
    value: float,
    stderr: float | None = None,
    reference_value: float | None = None,
    bound: float | None = None,
    flag: bool = True,
) -> bool:
    """Decide a row's pass state from its fields.

    Input contract:
    - `le_bound` needs `bound`; `math.inf` always passes.
    - `within_3se` needs `stderr` and `reference_value`.
    - `equals` needs `reference_value`; `bound`, when given, is the allowed
      absolute difference, otherwise the measure tolerance.
    - `flag` passes through `flag`.

    Output contract:
    - Returns the pass state; a missing operand fails the row.

    Side effects:
    - None.
    """

    tolerances = get_settings().tolerances
    if rule == "le_bound":
        if bound is None or math.isnan(value):
            return False
        return math.isinf(bound) or value <= bound + tolerances.bound
    if rule == "within_3se":
        if stderr is None or reference_value is None:
            return False
        # a zero stderr still allows round-off around the reference
        return abs(value - reference_value) <= 3.0 * stderr + tolerances.measure
    if rule == "equals":
        if reference_value is None:
            return False
        slack = tolerances.measure if bound is None else bound
        return abs(value - reference_value) <= slack
    return bool(flag)


def make_row(
    experiment_id: str,
    statistic_name: str,
    value: float,
    rule: ComparisonRule,
    stderr: float | None = None,
    reference_value: float | None = None,
    bound: float | None = None,
    flag: bool = True,
) -> ResultRow:
    """Build a `ResultRow` whose `passed` follows from `rule`."""

    return ResultRow(
        experiment_id=experiment_id,
        statistic_name=statistic_name,
        value=float(value),
        stderr=None if stderr is None else float(stderr),
        reference_value=None if reference_value is None else float(reference_value),
        bound=None if bound is None else float(bound),
        passed=evaluate_rule(rule, float(value), stderr, reference_value, bound, flag),
        rule=rule,
    )


def recheck(row: ResultRow) -> bool:
    """Re-derive `passed` for an existing row; `flag` rows keep their state."""

    return evaluate_rule(
        row.rule,
        row.value,
        row.stderr,
        row.reference_value,
        row.bound,
        row.passed,
    )


def summarize(rows: list[ResultRow]) -> MetricsSummary:
    """Aggregate pass counts over one run.

    Input contract:
    - `rows` are the rows of one experiment.

    Output contract:
    - `pass_rate` is 1.0 for an empty run.

    Side effects:
    - None.
    """

    failed = [row for row in rows if not row.passed]
    summary: MetricsSummary = {
        "rows": len(rows),
        "failed": len(failed),
        "pass_rate": (len(rows) - len(failed)) / len(rows) if rows else 1.0,
        "failed_statistics": [row.statistic_name for row in failed],
    }
    return summary
