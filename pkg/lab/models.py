"""Balanced random matrix models and their reproducible streams.

Rules for this layer:
- A model is an immutable description; sampling takes an explicit generator.
- Sample `i` of experiment `e` under seed `s` always uses `stream(s, e, i)`,
  so results do not depend on how samples are spread over workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from sympy import primefactors

from config.loader import get_settings
from core.errors import CapExceeded, ConfigInvalid, PreconditionViolated
from core.spectral import epsilon_balanced_coordinates
from samplers.base import BlockSampler
from samplers.registry import build_sampler


def stream(seed: int, experiment: int, index: int) -> np.random.Generator:
    """Counter-based generator for sample `index` of `experiment`."""

    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, experiment, index])))


@dataclass(frozen=True, slots=True)
class Partition:
    """Disjoint cover of `range(ground_size)` by nonempty blocks.

    Input contract:
    - `blocks` are disjoint, nonempty and cover every index exactly once.

    Output contract:
    - `max_block` is the largest block size, `count` the number of blocks.

    Side effects:
    - None.
    """

    ground_size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        seen = sorted(i for block in self.blocks for i in block)
        if any(not block for block in self.blocks):
            raise PreconditionViolated("partition blocks must be nonempty")
        if seen != list(range(self.ground_size)):
            raise PreconditionViolated(f"blocks do not partition range({self.ground_size})")

    @classmethod
    def contiguous(cls, ground_size: int, block_size: int) -> Partition:
        if block_size < 1:
            raise PreconditionViolated(f"block size must be positive, got {block_size}")
        blocks = tuple(
            tuple(range(start, min(start + block_size, ground_size)))
            for start in range(0, ground_size, block_size)
        )
        return cls(ground_size, blocks)

    @classmethod
    def singletons(cls, ground_size: int) -> Partition:
        return cls.contiguous(ground_size, 1)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> Partition:
        blocks, start = [], 0
        for size in sizes:
            blocks.append(tuple(range(start, start + size)))
            start += size
        return cls(start, tuple(blocks))

    @property
    def max_block(self) -> int:
        return max((len(block) for block in self.blocks), default=0)

    @property
    def count(self) -> int:
        return len(self.blocks)

    def restrict(self, indices: Sequence[int]) -> Partition:
        """Induced partition on `indices`, renumbered in the given order."""

        position = {index: k for k, index in enumerate(indices)}
        blocks = tuple(
            tuple(position[i] for i in block if i in position) for block in self.blocks
        )
        return Partition(len(indices), tuple(block for block in blocks if block))


@dataclass(frozen=True, slots=True)
class BalancedMatrixModel:
    """Block matrix with independent blocks `M[P_i, Q_j]`.

    Input contract:
    - `row_partition` covers the rows, `col_partition` the columns.
    - `sampler` draws every block unless `overrides[(i, j)]` names another.
    - `modulus` is the entry ring `Z/a`, 0 for the integers.

    Output contract:
    - `h = |P|`, `w = |Q|`; `declared_epsilon(a)` is the smallest declared
      block balancedness over `Z/a`.

    Side effects:
    - None.
    """

    n_rows: int
    n_cols: int
    row_partition: Partition
    col_partition: Partition
    sampler: BlockSampler
    modulus: int = 0
    overrides: Mapping[tuple[int, int], BlockSampler] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.row_partition.ground_size != self.n_rows:
            raise PreconditionViolated("row partition does not cover the rows")
        if self.col_partition.ground_size != self.n_cols:
            raise PreconditionViolated("column partition does not cover the columns")
        if self.modulus < 0:
            raise PreconditionViolated(f"modulus must be nonnegative, got {self.modulus}")

    @property
    def h(self) -> int:
        return self.row_partition.max_block

    @property
    def w(self) -> int:
        return self.col_partition.max_block

    def block_sampler(self, i: int, j: int) -> BlockSampler:
        return self.overrides.get((i, j), self.sampler)

    def blocks(self) -> list[tuple[int, int, tuple[int, ...], tuple[int, ...]]]:
        return [
            (i, j, rows, cols)
            for i, rows in enumerate(self.row_partition.blocks)
            for j, cols in enumerate(self.col_partition.blocks)
        ]

    def declared_epsilon(self, a: int) -> float:
        return min(
            self.block_sampler(i, j).declared_epsilon((len(rows), len(cols)), a)
            for i, j, rows, cols in self.blocks()
        )

    def summary(self, a: int) -> dict[str, Any]:
        return {
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "w": self.w,
            "h": self.h,
            "epsilon": self.declared_epsilon(a),
            "sampler": self.sampler.describe(),
        }

    def restrict_columns(self, columns: Sequence[int]) -> BalancedMatrixModel:
        """Model of the submatrix on `columns`; blocks keep their samplers."""

        col_partition = self.col_partition.restrict(columns)
        old_index = {}
        for new_j, block in enumerate(col_partition.blocks):
            original = columns[block[0]]
            old_index[new_j] = next(
                j for j, cols in enumerate(self.col_partition.blocks) if original in cols
            )
        overrides = {
            (i, new_j): self.overrides[(i, old_j)]
            for new_j, old_j in old_index.items()
            for i in range(self.row_partition.count)
            if (i, old_j) in self.overrides
        }
        return BalancedMatrixModel(
            n_rows=self.n_rows,
            n_cols=len(columns),
            row_partition=self.row_partition,
            col_partition=col_partition,
            sampler=self.sampler,
            modulus=self.modulus,
            overrides=overrides,
        )


def uniform_block_model(
    n_rows: int,
    n_cols: int,
    sampler: BlockSampler,
    block_rows: int = 1,
    block_cols: int = 1,
    modulus: int = 0,
) -> BalancedMatrixModel:
    """Contiguous `block_rows x block_cols` blocks all drawn from `sampler`."""

    return BalancedMatrixModel(
        n_rows=n_rows,
        n_cols=n_cols,
        row_partition=Partition.contiguous(n_rows, block_rows),
        col_partition=Partition.contiguous(n_cols, block_cols),
        sampler=sampler,
        modulus=modulus,
    )


def build_model(spec: Mapping[str, Any], n_rows: int, n_cols: int) -> BalancedMatrixModel:
    """Build a model from an experiment `model` mapping.

    Recognized fields: `family` and its sampler fields, `block: [h, w]`
    and `modulus`.
    """

    block = spec.get("block", [1, 1])
    if not isinstance(block, (list, tuple)) or len(block) != 2:
        raise ConfigInvalid(f"model.block must be [rows, cols], got {block!r}")
    return uniform_block_model(
        n_rows,
        n_cols,
        build_sampler(spec),
        block_rows=int(block[0]),
        block_cols=int(block[1]),
        modulus=int(spec.get("modulus", 0)),
    )


def sample_matrix(model: BalancedMatrixModel, rng: np.random.Generator) -> np.ndarray:
    """Draw one matrix; each block independently from its sampler.

    Input contract:
    - `rng` is the stream assigned to this sample.

    Output contract:
    - int64 array of shape `(n_rows, n_cols)`, reduced modulo `model.modulus`
      when it is positive. Blocks of one shape and sampler are drawn in one
      vectorized call, in row-major block order.

    Side effects:
    - Advances `rng`.
    """

    matrix = np.zeros((model.n_rows, model.n_cols), dtype=np.int64)
    groups: dict[tuple[int, tuple[int, int]], list[tuple[tuple[int, ...], tuple[int, ...]]]] = {}
    samplers: dict[int, BlockSampler] = {}
    for i, j, rows, cols in model.blocks():
        sampler = model.block_sampler(i, j)
        samplers[id(sampler)] = sampler
        groups.setdefault((id(sampler), (len(rows), len(cols))), []).append((rows, cols))
    for (sampler_id, shape), members in groups.items():
        draws = samplers[sampler_id].sample(rng, shape, len(members))
        for (rows, cols), block in zip(members, draws):
            matrix[np.ix_(rows, cols)] = block
    if model.modulus:
        matrix %= model.modulus
    return matrix


@dataclass(slots=True)
class BalanceReport:
    """Measured balancedness of one block law.

    `mode` is `exhaustive` (exact) or `monte-carlo`; the latter only scans a
    random sample of index-`p` subgroups and can miss a violation.
    """

    mode: str
    shape: tuple[int, int]
    modulus: int
    target_epsilon: float
    measured_epsilon: float
    passed: bool
    subgroups_checked: int


def verify_block_balanced(
    sampler: BlockSampler,
    shape: tuple[int, int],
    a: int,
    epsilon: float,
    mode: str = "exhaustive",
    rng: np.random.Generator | None = None,
    samples: int = 20000,
    functionals: int = 256,
) -> BalanceReport:
    """Check that a block law is `epsilon`-balanced in `((Z/a)^rows)^cols`.

    Input contract:
    - Exhaustive mode needs `a^(rows*cols)` and the outcome count within
      `caps.exhaustive_block_outcomes`.

    Output contract:
    - Exhaustive mode scans every maximal subgroup (kernels of nonzero
      functionals to `Z/p`, `p | a`); Monte-Carlo mode estimates coset
      masses of `functionals` random index-`p` subgroups.

    Side effects:
    - Monte-Carlo mode advances `rng`.
    """

    cap = get_settings().caps.exhaustive_block_outcomes
    size = shape[0] * shape[1]
    tolerance = get_settings().tolerances.measure
    if mode == "exhaustive":
        if a**size > cap:
            raise CapExceeded(f"block group of order {a}^{size} exceeds cap {cap}")
        points, probs = sampler.outcomes(shape, cap)
        measured = epsilon_balanced_coordinates(np.mod(points, a), probs, [a] * size)
        checked = sum(p**size - 1 for p in primefactors(a))
    elif mode == "monte-carlo":
        generator = rng if rng is not None else np.random.default_rng(0)
        draws = np.mod(sampler.sample(generator, shape, samples).reshape(samples, size), a)
        heaviest = 0.0
        checked = 0
        for p in primefactors(a):
            coefficients = generator.integers(0, p, size=(functionals, size))
            coefficients = coefficients[coefficients.any(axis=1)]
            values = (draws @ coefficients.T) % p
            for column in values.T:
                heaviest = max(heaviest, float(np.bincount(column, minlength=p).max()) / samples)
            checked += len(coefficients)
        measured = 1.0 - heaviest if checked else 1.0
    else:
        raise PreconditionViolated(f"unknown verification mode {mode!r}")
    return BalanceReport(
        mode=mode,
        shape=shape,
        modulus=a,
        target_epsilon=epsilon,
        measured_epsilon=measured,
        passed=measured >= epsilon - tolerance,
        subgroups_checked=checked,
    )

