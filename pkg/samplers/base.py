"""Block sampler contracts.

A sampler draws independent copies of one block `M_{P_i, Q_j}` of a balanced
random matrix. Samplers are pure descriptions: all randomness comes from the
generator passed in, so a block is reproducible from its stream.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np


class BlockSampler(Protocol):
    """Sampler contract used by the registry and the matrix models.

    Input contract:
    - `shape` is `(rows, cols)` of one block; `count` blocks are drawn at once.

    Output contract:
    - `sample` returns an int64 array of shape `(count, rows, cols)`.
    - `outcomes` returns `(points, probs)`: every block value, flattened
      row-major to length `rows * cols`, with its probability.
    - `declared_epsilon(shape, a)` is the balancedness the family guarantees
      for the block group `((Z/a)^rows)^cols`.

    Side effects:
    - `sample` advances `rng`.
    """

    family: str

    def sample(self, rng: np.random.Generator, shape: tuple[int, int], count: int) -> np.ndarray:
        """Draw `count` independent blocks."""

    def outcomes(self, shape: tuple[int, int], cap: int) -> tuple[np.ndarray, np.ndarray]:
        """Enumerate the exact block law, raising `CapExceeded` beyond `cap` outcomes."""

    def declared_epsilon(self, shape: tuple[int, int], a: int) -> float:
        """Balancedness guaranteed for the block group over `Z/a`."""

    def describe(self) -> dict[str, object]:
        """JSON-serializable parameters for provenance."""
