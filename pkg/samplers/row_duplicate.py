"""Blocks built from one random row copied down the block, plus iid noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.errors import CapExceeded
from samplers.iid import IidSampler


@dataclass(frozen=True, slots=True)
class RowDuplicateSampler:
    """`block[i, j] = row[j] + noise[i, j]` with `row` and `noise` iid.

    Output contract:
    - Rows of a block are strongly dependent; the noise is independent of
      the shared row, so the block is as balanced as one noise entry.
    """

    row: IidSampler
    noise: IidSampler
    family: str = "row_duplicate"

    def sample(self, rng: np.random.Generator, shape: tuple[int, int], count: int) -> np.ndarray:
        rows = self.row.sample(rng, (1, shape[1]), count)
        noise = self.noise.sample(rng, shape, count)
        return rows + noise

    def outcomes(self, shape: tuple[int, int], cap: int) -> tuple[np.ndarray, np.ndarray]:
        row_points, row_probs = self.row.outcomes((1, shape[1]), cap)
        noise_points, noise_probs = self.noise.outcomes(shape, cap)
        total = len(row_probs) * len(noise_probs)
        if total > cap:
            raise CapExceeded(f"{total} block outcomes exceed cap {cap}")
        tiled_rows = np.tile(row_points, (1, shape[0]))
        points = (tiled_rows[:, None, :] + noise_points[None, :, :]).reshape(total, -1)
        probs = np.outer(row_probs, noise_probs).ravel()
        return points, probs

    def declared_epsilon(self, shape: tuple[int, int], a: int) -> float:
        return self.noise.declared_epsilon(shape, a)

    def describe(self) -> dict[str, object]:
        return {"family": self.family, "row": self.row.describe(), "noise": self.noise.describe()}
