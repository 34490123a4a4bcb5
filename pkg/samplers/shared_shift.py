"""Blocks sharing one random offset: `block = iid + s * ones`."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from core.errors import CapExceeded, PreconditionViolated
from samplers.iid import IidSampler

DEFAULT_SHIFT_RANGE = 12


@dataclass(frozen=True, slots=True)
class SharedShiftSampler:
    """Iid entries plus a single uniform shift in `[0, shift_range)` per block.

    Input contract:
    - `shift_range >= 1`; entries stay integers (reduce modulo `a` downstream).

    Output contract:
    - Entries within a block are positively correlated through the shift;
      blocks are independent. The shift is independent of the iid part, so
      no coset gains mass and the block keeps the iid entry balancedness.

    Side effects:
    - None.
    """

    base: IidSampler
    shift_range: int = DEFAULT_SHIFT_RANGE
    family: str = "shared_shift"

    def __post_init__(self) -> None:
        if self.shift_range < 1:
            raise PreconditionViolated(f"shift_range must be positive, got {self.shift_range}")

    def sample(self, rng: np.random.Generator, shape: tuple[int, int], count: int) -> np.ndarray:
        blocks = self.base.sample(rng, shape, count)
        shifts = rng.integers(0, self.shift_range, size=count)
        return blocks + shifts[:, None, None]

    def outcomes(self, shape: tuple[int, int], cap: int) -> tuple[np.ndarray, np.ndarray]:
        points, probs = self.base.outcomes(shape, cap)
        if len(probs) * self.shift_range > cap:
            raise CapExceeded(f"{len(probs) * self.shift_range} block outcomes exceed cap {cap}")
        shifted = [points + s for s in range(self.shift_range)]
        weight = 1.0 / self.shift_range
        return np.concatenate(shifted), np.tile(probs * weight, self.shift_range)

    def declared_epsilon(self, shape: tuple[int, int], a: int) -> float:
        return self.base.declared_epsilon(shape, a)

    def describe(self) -> dict[str, object]:
        return {"family": self.family, "base": self.base.describe(), "shift_range": self.shift_range}
