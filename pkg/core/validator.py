"""Validation layer for group tables and probability weights.

This module only inspects raw arrays and reports violations. It must not build
groups, normalize identities, or raise; constructors decide which violation is
fatal and which exception class it maps to.
"""

from __future__ import annotations

import numpy as np

from core.types import ValidationResult


def _first_duplicate(line: np.ndarray) -> int | None:
    """Return the first value occurring twice in `line`, or `None`."""

    values, counts = np.unique(line, return_counts=True)
    repeated = values[counts > 1]
    return int(repeated[0]) if repeated.size else None


def shape_violations(table: np.ndarray) -> list[str]:
    """Validate that a table is a non-empty square matrix of in-range indices.

    Input contract:
    - `table` is any integer array.

    Output contract:
    - Returns violation messages; empty when shape and range are valid.

    Side effects:
    - None.
    """

    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        return [f"table_not_square: shape {tuple(table.shape)}"]
    order = table.shape[0]
    if order == 0:
        return ["table_empty"]
    bad = np.argwhere((table < 0) | (table >= order))
    if bad.size:
        row, col = (int(v) for v in bad[0])
        return [f"entry_out_of_range: cell ({row}, {col}) = {int(table[row, col])}"]
    return []


def latin_square_violations(table: np.ndarray) -> list[str]:
    """Report rows and columns that are not permutations of `0..order-1`.

    Input contract:
    - `table` passed `shape_violations`.

    Output contract:
    - One message per failing row or column, naming a repeated cell.

    Side effects:
    - None.
    """

    violations: list[str] = []
    for axis_name, lines in (("row", table), ("column", table.T)):
        for index, line in enumerate(lines):
            repeated = _first_duplicate(line)
            if repeated is None:
                continue
            position = int(np.flatnonzero(line == repeated)[1])
            cell = (index, position) if axis_name == "row" else (position, index)
            violations.append(
                f"{axis_name}_{index}_repeats_{repeated}: cell {cell}"
            )
    return violations


def identity_candidates(table: np.ndarray) -> list[int]:
    """Return every element whose row and column are the identity permutation."""

    span = np.arange(table.shape[0])
    rows_ok = (table == span[None, :]).all(axis=1)
    cols_ok = (table == span[:, None]).all(axis=0)
    return [int(e) for e in np.flatnonzero(rows_ok & cols_ok)]


def associativity_violations(table: np.ndarray, limit: int = 1) -> list[str]:
    """Find triples `(a, b, c)` with `(ab)c != a(bc)`.

    Input contract:
    - `table` is a Latin square.
    - `limit` caps the number of reported triples.

    Output contract:
    - Returns at most `limit` messages, scanning `a` in increasing order.

    Side effects:
    - None.
    """

    violations: list[str] = []
    for a in range(table.shape[0]):
        left = table[table[a]]
        right = table[a][table]
        bad = np.argwhere(left != right)
        for b, c in bad[: limit - len(violations)]:
            violations.append(f"not_associative: triple ({a}, {int(b)}, {int(c)})")
        if len(violations) >= limit:
            break
    return violations


def validate_cayley_table(table: np.ndarray) -> ValidationResult:
    """Run every group-axiom check on a raw table.

    Input contract:
    - `table` is any integer array.

    Output contract:
    - Returns `ValidationResult`; later checks are skipped once an earlier
      structural check fails.

    Side effects:
    - None.
    """

    violations = shape_violations(table)
    if violations:
        return ValidationResult(violations=violations)
    violations = latin_square_violations(table)
    if violations:
        return ValidationResult(violations=violations)
    if not identity_candidates(table):
        return ValidationResult(violations=["no_identity"])
    return ValidationResult(violations=associativity_violations(table))


def probability_violations(
    weights: np.ndarray,
    clamp: float = 1e-12,
    mass_tolerance: float = 1e-9,
) -> list[str]:
    """Validate that weights describe a probability measure.

    Input contract:
    - `weights` is a 1-D float array.
    - Entries in `[-clamp, 0)` count as round-off, not violations.

    Output contract:
    - Returns violation messages; empty for a valid probability vector.

    Side effects:
    - None.
    """

    violations: list[str] = []
    if not np.isfinite(weights).all():
        violations.append("non_finite_weight")
        return violations
    negative = np.flatnonzero(weights < -clamp)
    if negative.size:
        index = int(negative[0])
        violations.append(f"negative_weight: element {index} = {weights[index]:.3e}")
    mass = float(weights.sum())
    if abs(mass - 1.0) > mass_tolerance:
        violations.append(f"mass_not_one: {mass:.12g}")
    return violations
