"""Arithmetic of finitely generated abelian groups and Cohen-Lenstra masses.

Groups are kept in canonical invariant-factor form `Z^r + Z/d1 + ... + Z/dk`
with `d1 | d2 | ... | dk` and every `di >= 2`. Memo tables here are filled
once per key and never mutated afterwards.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

import numpy as np
from scipy.special import zeta
from sympy import factorint
from sympy.utilities.iterables import partitions

from config.loader import get_settings
from core.errors import BInfinite, CapExceeded, ExponentMismatch, PreconditionViolated
from core.groups import FiniteGroup, cyclic_group, direct_product, subgroup_lattice, trivial_group


@dataclass(frozen=True, slots=True)
class PartitionType:
    """Abelian `p`-group `Z/p^l1 + Z/p^l2 + ...` with `l1 >= l2 >= ... >= 1`."""

    prime: int
    parts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(part < 1 for part in self.parts) or list(self.parts) != sorted(self.parts, reverse=True):
            raise PreconditionViolated(f"parts must be positive and decreasing: {self.parts}")

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def order(self) -> int:
        return self.prime**self.size

    def to_group(self) -> AbelianGroup:
        return AbelianGroup.from_cyclic([self.prime**part for part in self.parts])


@dataclass(frozen=True, slots=True)
class AbelianGroup:
    """Finitely generated abelian group in invariant-factor form.

    Input contract:
    - `invariant_factors` is a divisibility chain of integers `>= 2`.

    Output contract:
    - Hashable value; `key` is the canonical isomorphism-class string.

    Side effects:
    - None.
    """

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.free_rank < 0:
            raise PreconditionViolated("free rank must be nonnegative")
        factors = self.invariant_factors
        if any(d < 2 for d in factors):
            raise PreconditionViolated(f"invariant factors must be >= 2: {factors}")
        if any(b % a for a, b in zip(factors, factors[1:])):
            raise PreconditionViolated(f"invariant factors must form a divisibility chain: {factors}")

    @classmethod
    def from_cyclic(cls, orders: Sequence[int], free_rank: int = 0) -> AbelianGroup:
        """Canonicalize a direct sum of cyclic groups; order 0 means `Z`."""

        exponents: dict[int, list[int]] = {}
        rank = free_rank
        for order in orders:
            if order == 0:
                rank += 1
                continue
            if order < 0:
                raise PreconditionViolated(f"cyclic order must be nonnegative: {order}")
            for p, e in factorint(order).items():
                exponents.setdefault(p, []).append(e)
        width = max((len(v) for v in exponents.values()), default=0)
        factors = [1] * width
        for p, powers in exponents.items():
            for slot, e in enumerate(sorted(powers, reverse=True)):
                factors[width - 1 - slot] *= p**e
        return cls(free_rank=rank, invariant_factors=tuple(d for d in factors if d > 1))

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> AbelianGroup:
        return cls.from_cyclic(
            [int(d) for d in payload.get("invariant_factors", [])],
            free_rank=int(payload.get("free_rank", 0)),
        )

    def to_json(self) -> dict[str, Any]:
        return {"free_rank": self.free_rank, "invariant_factors": list(self.invariant_factors)}

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise BInfinite(f"{self.key} is infinite")
        return math.prod(self.invariant_factors)

    @property
    def exponent(self) -> int:
        if not self.is_finite:
            raise BInfinite(f"{self.key} has no finite exponent")
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @property
    def key(self) -> str:
        parts = [f"Z^{self.free_rank}"] if self.free_rank > 1 else ["Z"] * self.free_rank
        parts += [f"Z/{d}" for d in self.invariant_factors]
        return " x ".join(parts) or "1"

    def primes(self) -> list[int]:
        return sorted({p for d in self.invariant_factors for p in factorint(d)})

    def p_part(self, p: int) -> PartitionType:
        parts = [factorint(d).get(p, 0) for d in self.invariant_factors]
        return PartitionType(p, tuple(sorted((e for e in parts if e), reverse=True)))

    def realize(self) -> FiniteGroup:
        """Cayley-table copy; coordinates are big-endian mixed radix."""

        if not self.is_finite:
            raise BInfinite(f"cannot realize infinite group {self.key}")
        return coordinate_group(self.invariant_factors)

    def __str__(self) -> str:
        return self.key


@functools.lru_cache(maxsize=256)
def coordinate_group(moduli: tuple[int, ...]) -> FiniteGroup:
    """`Z/m1 x Z/m2 x ...` in the given factor order, indexed by `np.ravel_multi_index`."""

    group = trivial_group()
    for d in moduli:
        group = cyclic_group(d) if group.order == 1 else direct_product(group, cyclic_group(d))
    return group


def trivial() -> AbelianGroup:
    return AbelianGroup()


def tensor_mod(A: AbelianGroup, a: int) -> AbelianGroup:
    """Return `A (x) Z/a`: `Z/d -> Z/gcd(d, a)` and `Z -> Z/a`."""

    if a < 1:
        raise PreconditionViolated(f"modulus must be positive, got {a}")
    orders = [math.gcd(d, a) for d in A.invariant_factors] + [a] * A.free_rank
    return AbelianGroup.from_cyclic(orders)


def hom_count(A: AbelianGroup, B: AbelianGroup) -> int:
    """Return `#Hom(A, B)` for finite `B`.

    Input contract:
    - `B` is finite; `A` may have free rank.

    Output contract:
    - `prod gcd(d_i, e_j) * |B|^rank(A)`.

    Side effects:
    - None.
    """

    if not B.is_finite:
        raise BInfinite(f"#Hom into infinite {B.key} is not finite")
    count = B.order**A.free_rank
    for d in A.invariant_factors:
        for e in B.invariant_factors:
            count *= math.gcd(d, e)
    return count


def _hom_count_into_subgroups(A: AbelianGroup, B: AbelianGroup) -> list[int]:
    """`#Hom(A, H)` for every `H` in the subgroup lattice of `B`."""

    G = B.realize()
    lattice = subgroup_lattice(G)
    orders = G.element_orders()
    counts = []
    for H in lattice:
        local_orders = orders[H.as_array()]
        count = H.order**A.free_rank
        for d in A.invariant_factors:
            count *= int(np.count_nonzero(d % local_orders == 0))
        counts.append(count)
    return counts


@functools.lru_cache(maxsize=4096)
def _sur_count(A: AbelianGroup, B: AbelianGroup) -> int:
    lattice = subgroup_lattice(B.realize())
    mobius = lattice.mobius_to_top()
    homs = _hom_count_into_subgroups(A, B)
    return sum(m * h for m, h in zip(mobius, homs) if m)


def sur_count(A: AbelianGroup, B: AbelianGroup, cap: int | None = None) -> int:
    """Return `#Sur(A, B)` by Moebius inversion over the subgroups of `B`.

    Input contract:
    - `B` finite with order within `cap` (default from settings).

    Output contract:
    - Exact integer `sum_H mu(H, B) #Hom(A, H)`.

    Side effects:
    - Memoizes per `(A, B)` pair and fills the lattice cache of `B`.
    """

    if not B.is_finite:
        raise BInfinite(f"#Sur into infinite {B.key} is not finite")
    limit = cap if cap is not None else get_settings().caps.sur_count_order
    if B.order > limit:
        raise CapExceeded(f"target order {B.order} exceeds sur_count cap {limit}")
    return _sur_count(A, B)


def _aut_order_p(partition: PartitionType) -> int:
    """Closed-form automorphism count of an abelian `p`-group."""

    p = partition.prime
    e = sorted(partition.parts)
    k = len(e)
    total = 1
    for j in range(1, k + 1):
        d_j = max(l for l in range(1, k + 1) if e[l - 1] == e[j - 1])
        c_j = min(l for l in range(1, k + 1) if e[l - 1] == e[j - 1])
        total *= p**d_j - p ** (j - 1)
        total *= (p ** e[j - 1]) ** (k - d_j)
        total *= (p ** (e[j - 1] - 1)) ** (k - c_j + 1)
    return total


def aut_order(B: AbelianGroup) -> int:
    """Return `|Aut(B)|` as a product of per-prime closed forms."""

    if not B.is_finite:
        raise BInfinite(f"|Aut| of infinite {B.key} is not finite")
    return math.prod(_aut_order_p(B.p_part(p)) for p in B.primes())


def _cutoff() -> int:
    return get_settings().numerics.product_cutoff


@functools.lru_cache(maxsize=256)
def _euler_factor(p: int, u: int, cutoff: int) -> float:
    return math.prod(1.0 - float(p) ** (-k) for k in range(u + 1, cutoff + 1))


def lambda_p_mass(B: PartitionType, u: int) -> float:
    """Return `prod_{k>u} (1 - p^-k) / (|B|^u |Aut B|)`, product cut at the settings cutoff.

    The omitted factors change the value by a relative amount below
    `2 * p^-(cutoff+1)`, under `2^-60` at the default cutoff of 64.
    """

    if u < 0:
        raise PreconditionViolated(f"u must be nonnegative, got {u}")
    weight = 1.0 / (float(B.order) ** u * float(_aut_order_p(B)))
    return weight * _euler_factor(B.prime, u, _cutoff())


@functools.lru_cache(maxsize=64)
def _zeta_factor(u: int, cutoff: int) -> float:
    return math.prod(1.0 / float(zeta(k)) for k in range(u + 1, cutoff + 1))


def lambda_u_finite_mass(B: AbelianGroup, u: int) -> float:
    """Return `prod_{k>u} zeta(k)^-1 / (|B|^u |Aut B|)` for finite `B`, `u >= 1`."""

    if u < 1:
        raise PreconditionViolated("lambda_u on finite groups needs u >= 1")
    weight = 1.0 / (float(B.order) ** u * float(aut_order(B)))
    return weight * _zeta_factor(u, _cutoff())


def p_group_partitions(size: int) -> Iterator[tuple[int, ...]]:
    """Yield every partition of `size` as a decreasing tuple."""

    if size == 0:
        yield ()
        return
    for multiplicities in partitions(size):
        parts: list[int] = []
        for part in sorted(multiplicities, reverse=True):
            parts.extend([part] * multiplicities[part])
        yield tuple(parts)


def partitions_at_most(total: int, slots: int) -> Iterator[tuple[int, ...]]:
    """Yield decreasing tuples of `slots` nonnegative integers summing to `total`."""

    if slots == 0:
        if total == 0:
            yield ()
        return
    for parts in p_group_partitions(total):
        if len(parts) <= slots:
            yield parts + (0,) * (slots - len(parts))


@functools.lru_cache(maxsize=256)
def _cumulative_p_mass(p: int, u: int, size: int) -> float:
    """Total `lambda_p_mass` over all `p`-groups of order at most `p^size`."""

    if size < 0:
        return 0.0
    layer = sum(lambda_p_mass(PartitionType(p, parts), u) for parts in p_group_partitions(size))
    return _cumulative_p_mass(p, u, size - 1) + layer


def _restricted_p_mass(p: int, e: int, target: PartitionType, u: int, tol: float) -> float:
    """Mass of `p`-groups `B` with `B (x) Z/p^e` isomorphic to `target`.

    Such `B` keep the parts of `target` below `e` and replace each part equal
    to `e` by an arbitrary part `>= e`. Groups are visited by increasing
    order; the unvisited mass is at most one minus the mass of all
    `p`-groups up to the current order.
    """

    fixed = tuple(part for part in target.parts if part < e)
    free = sum(1 for part in target.parts if part == e)
    base = sum(fixed) + free * e
    total = 0.0
    excess = 0
    while True:
        for extra in partitions_at_most(excess, free):
            lifted = tuple(e + x for x in extra)
            parts = tuple(sorted(lifted + fixed, reverse=True))
            total += lambda_p_mass(PartitionType(p, parts), u)
        tail = max(0.0, 1.0 - _cumulative_p_mass(p, u, base + excess))
        if free == 0 or tail < tol:
            return total
        excess += 1


def lambda_u_tensor_mass(a: int, H: AbelianGroup, u: int, tol: float = 1e-9) -> float:
    """Return `lambda_u(U_{a,H})`, the mass of groups `B` with `B (x) Z/a = H`.

    Input contract:
    - `H` is finite with exponent dividing `a`; `u >= 0`; `tol > 0`.

    Output contract:
    - Product over primes `p | a` of restricted `p`-part sums; the result
      is within `tol` of the untruncated value.

    Side effects:
    - Memoizes cumulative `p`-group masses.
    """

    if a < 1:
        raise PreconditionViolated(f"modulus must be positive, got {a}")
    if not H.is_finite or a % H.exponent:
        raise ExponentMismatch(f"exponent of {H.key} does not divide {a}")
    prime_powers = factorint(a)
    share = tol / max(1, len(prime_powers))
    result = 1.0
    for p, e in prime_powers.items():
        result *= _restricted_p_mass(p, e, H.p_part(p), u, share)
    return result


def abelian_groups_of_order(n: int) -> list[AbelianGroup]:
    """Every abelian group of order `n`, one per isomorphism class."""

    choices = [
        [PartitionType(p, parts) for parts in p_group_partitions(e)]
        for p, e in factorint(n).items()
    ]
    groups: list[AbelianGroup] = []
    for combo in itertools.product(*choices):
        orders = [part.prime**x for part in combo for x in part.parts]
        groups.append(AbelianGroup.from_cyclic(orders))
    return groups


def groups_of_exponent_dividing(a: int, max_rank: int) -> list[AbelianGroup]:
    """Abelian groups of exponent dividing `a` with at most `max_rank` factors."""

    per_prime: list[list[PartitionType]] = []
    for p, e in factorint(a).items():
        options = []
        for rank in range(max_rank + 1):
            for size in range(rank, rank * e + 1):
                for parts in p_group_partitions(size):
                    if len(parts) == rank and all(x <= e for x in parts):
                        options.append(PartitionType(p, parts))
        per_prime.append(options)
    return [
        AbelianGroup.from_cyclic([part.prime**x for part in combo for x in part.parts])
        for combo in itertools.product(*per_prime)
    ]
