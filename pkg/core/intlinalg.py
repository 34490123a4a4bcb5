"""Exact integer linear algebra: Smith normal form and cokernels.

Rules for this layer:
- `IntMatrix` entries are Python ints, so arithmetic never overflows.
- Unimodular transforms are always accumulated.
- `cokernel_mod` is the reference path; `cokernel_mod_local` is the
  numpy fast path used by the Monte-Carlo drivers and must agree with it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from sympy import factorint

from core.abelian import AbelianGroup
from core.errors import PreconditionViolated


@dataclass(frozen=True, slots=True)
class IntMatrix:
    """Dense row-major matrix of arbitrary-precision integers."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise PreconditionViolated("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows or any(len(row) != self.cols for row in self.entries):
            raise PreconditionViolated(f"entries do not match shape {self.rows}x{self.cols}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        entries = tuple(tuple(int(x) for x in row) for row in rows)
        width = cols if cols is not None else (len(entries[0]) if entries else 0)
        return cls(rows=len(entries), cols=width, entries=entries)

    @classmethod
    def from_array(cls, array: np.ndarray) -> IntMatrix:
        array = np.asarray(array)
        if array.ndim != 2:
            raise PreconditionViolated(f"expected a 2-d array, got shape {array.shape}")
        return cls.from_rows(array.tolist(), cols=int(array.shape[1]))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: int | None = None, cols: int | None = None) -> IntMatrix:
        r = rows if rows is not None else len(values)
        c = cols if cols is not None else len(values)
        grid = [[0] * c for _ in range(r)]
        for i, value in enumerate(values):
            grid[i][i] = int(value)
        return cls.from_rows(grid, cols=c)

    @classmethod
    def parse(cls, text: str) -> IntMatrix:
        """Parse whitespace-separated integer rows; blank lines are skipped."""

        rows = [[int(token) for token in line.split()] for line in text.splitlines() if line.strip()]
        if len({len(row) for row in rows}) > 1:
            raise PreconditionViolated("rows have different lengths")
        return cls.from_rows(rows)

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> IntMatrix:
        return cls.from_rows(payload["entries"], cols=int(payload.get("cols", 0)))

    @classmethod
    def load(cls, path: str | Path) -> IntMatrix:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            return cls.from_json(json.loads(text))
        return cls.parse(text)

    def to_text(self) -> str:
        return "\n".join(" ".join(str(x) for x in row) for row in self.entries)

    def to_json(self) -> dict[str, Any]:
        return {"rows": self.rows, "cols": self.cols, "entries": [list(row) for row in self.entries]}

    def to_lists(self) -> list[list[int]]:
        return [list(row) for row in self.entries]

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_rows([list(col) for col in zip(*self.entries)], cols=self.rows)

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise PreconditionViolated("hstack needs matching row counts")
        return IntMatrix.from_rows(
            [a + b for a, b in zip(self.entries, other.entries)],
            cols=self.cols + other.cols,
        )

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise PreconditionViolated(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        columns = list(zip(*other.entries)) if other.rows else [()] * other.cols
        return IntMatrix.from_rows(
            [[sum(x * y for x, y in zip(row, col)) for col in columns] for row in self.entries],
            cols=other.cols,
        )


@dataclass(frozen=True, slots=True)
class SmithDecomposition:
    """`left @ A @ right` is the diagonal of `diag`, padded with zeros."""

    left: IntMatrix
    diag: tuple[int, ...]
    right: IntMatrix

    def diagonal_matrix(self) -> IntMatrix:
        return IntMatrix.diagonal(self.diag, rows=self.left.rows, cols=self.right.cols)


def _smallest_nonzero(M: list[list[int]], start: int) -> tuple[int, int] | None:
    best: tuple[int, int] | None = None
    best_size = 0
    for i in range(start, len(M)):
        row = M[i]
        for j in range(start, len(row)):
            value = row[j]
            if value and (best is None or abs(value) < best_size):
                best, best_size = (i, j), abs(value)
                if best_size == 1:
                    return best
    return best


def _swap_rows(M: list[list[int]], i: int, k: int) -> None:
    if i != k:
        M[i], M[k] = M[k], M[i]


def _swap_cols(M: list[list[int]], j: int, k: int) -> None:
    if j != k:
        for row in M:
            row[j], row[k] = row[k], row[j]


def _add_row(M: list[list[int]], target: int, source: int, factor: int) -> None:
    if factor:
        src, dst = M[source], M[target]
        for col in range(len(dst)):
            dst[col] += factor * src[col]


def _add_col(M: list[list[int]], target: int, source: int, factor: int) -> None:
    if factor:
        for row in M:
            row[target] += factor * row[source]


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    """Return the Smith decomposition of `A` with accumulated transforms.

    Input contract:
    - Any integer matrix, including empty and zero matrices.

    Output contract:
    - `left @ A @ right == diagonal(diag)` exactly; `left` and `right` are
      unimodular; `diag` is nonnegative with `d_i | d_{i+1}` and has
      `min(rows, cols)` entries, zeros last.

    Side effects:
    - None.
    """

    M = A.to_lists()
    L = IntMatrix.identity(A.rows).to_lists()
    R = IntMatrix.identity(A.cols).to_lists()
    size = min(A.rows, A.cols)

    t = 0
    while t < size:
        position = _smallest_nonzero(M, t)
        if position is None:
            break
        _swap_rows(M, t, position[0])
        _swap_rows(L, t, position[0])
        _swap_cols(M, t, position[1])
        _swap_cols(R, t, position[1])

        while True:
            pivot = M[t][t]
            clean = True
            for i in range(t + 1, A.rows):
                q = M[i][t] // pivot
                _add_row(M, i, t, -q)
                _add_row(L, i, t, -q)
                clean = clean and M[i][t] == 0
            for j in range(t + 1, A.cols):
                q = M[t][j] // pivot
                _add_col(M, j, t, -q)
                _add_col(R, j, t, -q)
                clean = clean and M[t][j] == 0
            if not clean:
                # a remainder is now smaller than the pivot; bring it to (t, t)
                candidates = [(abs(M[i][t]), i, t) for i in range(t, A.rows) if M[i][t]]
                candidates += [(abs(M[t][j]), t, j) for j in range(t, A.cols) if M[t][j]]
                _, i, j = min(candidates)
                _swap_rows(M, t, i)
                _swap_rows(L, t, i)
                _swap_cols(M, t, j)
                _swap_cols(R, t, j)
                continue
            stray = next(
                (i for i in range(t + 1, A.rows) for j in range(t + 1, A.cols) if M[i][j] % pivot),
                None,
            )
            if stray is None:
                break
            _add_row(M, t, stray, 1)
            _add_row(L, t, stray, 1)
        t += 1

    for k in range(t):
        if M[k][k] < 0:
            M[k] = [-x for x in M[k]]
            L[k] = [-x for x in L[k]]

    return SmithDecomposition(
        left=IntMatrix.from_rows(L, cols=A.rows),
        diag=tuple(M[k][k] for k in range(size)),
        right=IntMatrix.from_rows(R, cols=A.cols),
    )


def cokernel(A: IntMatrix) -> AbelianGroup:
    """Return `Z^rows / A(Z^cols)` in invariant-factor form."""

    diag = smith_normal_form(A).diag
    nonzero = sum(1 for d in diag if d)
    return AbelianGroup(
        free_rank=A.rows - nonzero,
        invariant_factors=tuple(d for d in diag if d > 1),
    )


def cokernel_mod(A: IntMatrix, a: int) -> AbelianGroup:
    """Return `coker(A) (x) Z/a` via the Smith form of `[A | a I]`."""

    if a < 1:
        raise PreconditionViolated(f"modulus must be positive, got {a}")
    if a == 1 or A.rows == 0:
        return AbelianGroup()
    scaled = IntMatrix.diagonal([a] * A.rows)
    return cokernel(A.hstack(scaled))


def _local_exponents(block: np.ndarray, p: int, e: int) -> list[int]:
    """Cyclic exponents of `coker(block)` over `Z/p^e`, zeros dropped."""

    q = p**e
    M = np.mod(block.astype(np.int64), q)
    rows, cols = M.shape
    exponents: list[int] = []
    t = 0
    while t < min(rows, cols):
        sub = M[t:, t:]
        valuation = np.full(sub.shape, e, dtype=np.int64)
        nonzero = sub != 0
        valuation[nonzero] = 0
        for k in range(1, e):
            valuation[nonzero & (sub % p**k == 0)] = k
        if not nonzero.any():
            break
        i, j = np.unravel_index(int(np.argmin(valuation)), sub.shape)
        i, j = i + t, j + t
        M[[t, i]] = M[[i, t]]
        M[:, [t, j]] = M[:, [j, t]]
        v = int(valuation.min())
        step = p**v
        unit = int(M[t, t]) // step
        M[t] = np.mod(M[t] * pow(unit, -1, q), q)
        factors = M[t + 1 :, t] // step
        M[t + 1 :] = np.mod(M[t + 1 :] - np.outer(factors, M[t]), q)
        M[t, t + 1 :] = 0
        if v:
            exponents.append(v)
        t += 1
    exponents.extend([e] * (rows - t))
    return exponents


def cokernel_mod_local(A: IntMatrix | np.ndarray, a: int) -> AbelianGroup:
    """Return `coker(A) (x) Z/a` by elimination over each `Z/p^e` with `p^e || a`.

    Input contract:
    - `a >= 1`; `a^2` fits in int64.

    Output contract:
    - Same group as `cokernel_mod(A, a)`.

    Side effects:
    - None.
    """

    if a < 1:
        raise PreconditionViolated(f"modulus must be positive, got {a}")
    array = np.array(A.to_lists() if isinstance(A, IntMatrix) else A, dtype=object)
    if array.ndim != 2:
        array = array.reshape(0, 0)
    orders: list[int] = []
    for p, e in factorint(a).items():
        reduced = np.mod(array, p**e).astype(np.int64)
        orders.extend(p**x for x in _local_exponents(reduced, p, e))
    return AbelianGroup.from_cyclic(orders)
