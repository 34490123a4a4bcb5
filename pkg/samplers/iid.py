"""Blocks with independent, identically distributed entries."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from sympy import primefactors

from core.errors import CapExceeded, PreconditionViolated
from core.validator import probability_violations


def entry_epsilon(values: np.ndarray, probs: np.ndarray, a: int) -> float:
    """Balancedness of one entry law on `Z/a`.

    The maximal subgroups of `Z/a` are `pZ/a` for primes `p | a`, so the
    heaviest coset is the heaviest residue class modulo some such `p`.
    """

    heaviest = 0.0
    for p in primefactors(a):
        masses = np.bincount(np.mod(values, p), weights=probs, minlength=p)
        heaviest = max(heaviest, float(masses.max()))
    return 1.0 - heaviest if a > 1 else 1.0


@dataclass(frozen=True, slots=True)
class IidSampler:
    """Every entry drawn independently from a finite law on the integers.

    Input contract:
    - `values` and `probs` have equal length; `probs` is a probability vector.

    Output contract:
    - Blocks are products of entry laws; by the product rule for balanced
      laws the block is as balanced as one entry.

    Side effects:
    - None.
    """

    values: tuple[int, ...]
    probs: tuple[float, ...]
    family: str = "iid"

    def __post_init__(self) -> None:
        if len(self.values) != len(self.probs) or not self.values:
            raise PreconditionViolated("iid sampler needs matching nonempty values and probs")
        problems = probability_violations(np.asarray(self.probs, dtype=np.float64))
        if problems:
            raise PreconditionViolated(problems[0])

    def sample(self, rng: np.random.Generator, shape: tuple[int, int], count: int) -> np.ndarray:
        draws = rng.choice(len(self.values), size=(count, *shape), p=np.asarray(self.probs))
        return np.asarray(self.values, dtype=np.int64)[draws]

    def outcomes(self, shape: tuple[int, int], cap: int) -> tuple[np.ndarray, np.ndarray]:
        size = shape[0] * shape[1]
        support = [(v, p) for v, p in zip(self.values, self.probs) if p > 0]
        if len(support) ** size > cap:
            raise CapExceeded(f"{len(support)}^{size} block outcomes exceed cap {cap}")
        points, probs = [], []
        for combo in itertools.product(support, repeat=size):
            points.append([v for v, _ in combo])
            probs.append(float(np.prod([p for _, p in combo])))
        return np.asarray(points, dtype=np.int64).reshape(-1, size), np.asarray(probs)

    def declared_epsilon(self, shape: tuple[int, int], a: int) -> float:
        return entry_epsilon(np.asarray(self.values), np.asarray(self.probs), a)

    def describe(self) -> dict[str, object]:
        return {"family": self.family, "values": list(self.values), "probs": list(self.probs)}


def uniform_iid(a: int) -> IidSampler:
    return IidSampler(values=tuple(range(a)), probs=tuple([1.0 / a] * a))


def constant_iid(value: int = 0) -> IidSampler:
    return IidSampler(values=(value,), probs=(1.0,))
