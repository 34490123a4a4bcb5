"""Codes and depth of homomorphisms `(Z/a)^n -> G` relative to a partition.

A homomorphism is stored by its generator images: `images[i]` is the element
index of `f(e_i)` in the realized group `G.realize()`. Block subsets `sigma`
are bitmasks over the partition blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from sympy import factorint

from config.loader import get_settings
from core.abelian import AbelianGroup
from core.errors import CapExceeded, PreconditionViolated
from core.groups import FiniteGroup, generated_subgroup, subgroup_lattice
from core.types import DepthReport
from lab.models import Partition


def ell(D: int) -> int:
    """Number of prime factors of `D` counted with multiplicity."""

    return sum(factorint(D).values()) if D > 1 else 0


def images_from_matrix(f: np.ndarray, G: AbelianGroup, a: int) -> np.ndarray:
    """Convert a `k x n` coordinate matrix into generator element indices.

    Input contract:
    - Row `j` of `f` holds coordinates modulo the `j`-th invariant factor.
    - Every image has order dividing `a`, so `f` is defined on `(Z/a)^n`.

    Output contract:
    - int64 array of `n` element indices of `G.realize()`.

    Side effects:
    - None.
    """

    moduli = G.invariant_factors
    coords = np.atleast_2d(np.asarray(f, dtype=np.int64))
    if coords.shape[0] != len(moduli):
        raise PreconditionViolated(f"expected {len(moduli)} coordinate rows, got {coords.shape[0]}")
    if not moduli:
        return np.zeros(coords.shape[1], dtype=np.int64)
    reduced = np.mod(coords, np.asarray(moduli)[:, None])
    images = np.ravel_multi_index(tuple(reduced), moduli)
    orders = G.realize().element_orders()[images]
    if np.any(a % orders):
        raise PreconditionViolated(f"generator images must have order dividing {a}")
    return images.astype(np.int64)


@dataclass(slots=True)
class SpanIndex:
    """Memo of `[G : <S>]` keyed by the generator set `S`."""

    group: FiniteGroup
    cache: dict[frozenset[int], int] = field(default_factory=dict)

    def index(self, generators: Sequence[int]) -> int:
        key = frozenset(int(g) for g in generators)
        value = self.cache.get(key)
        if value is None:
            value = self.group.order // generated_subgroup(self.group, sorted(key)).order
            self.cache[key] = value
        return value


def _check_blocks(P: Partition) -> None:
    cap = get_settings().caps.code_blocks
    if P.count > cap:
        raise CapExceeded(f"{P.count} partition blocks exceed the exhaustive cap {cap}")


def _subsets(P: Partition) -> Iterator[tuple[int, tuple[int, ...], int]]:
    """Yield `(bitmask, sigma, |union sigma|)` in increasing bitmask order."""

    sizes = [len(block) for block in P.blocks]
    for mask in range(1 << P.count):
        sigma = tuple(i for i in range(P.count) if mask >> i & 1)
        yield mask, sigma, sum(sizes[i] for i in sigma)


def _remaining(images: np.ndarray, P: Partition, sigma: Sequence[int]) -> list[int]:
    removed = {i for b in sigma for i in P.blocks[b]}
    return [int(images[i]) for i in range(len(images)) if i not in removed]


def is_code(
    images: np.ndarray,
    P: Partition,
    w: float,
    G: AbelianGroup,
    spans: SpanIndex | None = None,
) -> bool:
    """Return whether `f` stays surjective after deleting any `sigma` with `|union sigma| < w`.

    Input contract:
    - `images` lists generator images; at most `caps.code_blocks` blocks.

    Output contract:
    - Depth-first search over block subsets; a branch stops growing once the
      deleted size reaches `w`, and the first non-surjective deletion ends
      the search.

    Side effects:
    - Fills `spans` when given.
    """

    _check_blocks(P)
    spans = spans or SpanIndex(G.realize())
    sizes = [len(block) for block in P.blocks]

    def search(start: int, sigma: tuple[int, ...], deleted: int) -> bool:
        if spans.index(_remaining(images, P, sigma)) != 1:
            return False
        for b in range(start, P.count):
            if deleted + sizes[b] < w and not search(b + 1, sigma + (b,), deleted + sizes[b]):
                return False
        return True

    if w <= 0:
        return spans.index(images.tolist()) == 1
    return search(0, (), 0)


def _candidates(
    images: np.ndarray, P: Partition, spans: SpanIndex
) -> list[tuple[int, tuple[int, ...], int]]:
    """`(D, sigma, |union sigma|)` for every block subset."""

    return [
        (spans.index(_remaining(images, P, sigma)), sigma, deleted)
        for _, sigma, deleted in _subsets(P)
    ]


def _depth_from_candidates(
    candidates: Sequence[tuple[int, tuple[int, ...], int]], delta: float, n: int, map_id: int
) -> DepthReport:
    best = DepthReport(map_id=map_id, depth=1, witness=(), index=1, ell_d=0)
    for D, sigma, deleted in candidates:
        if D > best.depth and deleted < ell(D) * delta * n:
            best = DepthReport(map_id=map_id, depth=D, witness=sigma, index=D, ell_d=ell(D))
    return best


def depth(
    images: np.ndarray,
    P: Partition,
    delta: float,
    G: AbelianGroup,
    map_id: int = 0,
    spans: SpanIndex | None = None,
) -> DepthReport:
    """Return the `(P, delta)`-depth of `f`.

    Input contract:
    - At most `caps.code_blocks` blocks; `delta > 0`.

    Output contract:
    - The largest `D = [G : f(V_rest)]` over subsets `sigma` with
      `|union sigma| < ell(D) delta n`; ties keep the first witness in
      bitmask order; `D = 1` with the empty witness when nothing qualifies.

    Side effects:
    - Fills `spans` when given.
    """

    _check_blocks(P)
    spans = spans or SpanIndex(G.realize())
    return _depth_from_candidates(_candidates(images, P, spans), delta, P.ground_size, map_id)


def count_depth_bound(n: int, D: int, delta: float, group_order: int, K: int) -> float:
    """Upper bound `K C(n, ceil(l delta n) - 1) 2^(l delta n) |G|^n D^(l delta n - n)` with `l = ell(D)`."""

    if K == 0:
        return 0.0
    reach = ell(D) * delta * n
    choose = math.comb(n, max(0, math.ceil(reach) - 1))
    return float(K * choose * 2.0**reach * float(group_order) ** n * float(D) ** (reach - n))


@dataclass(slots=True)
class DepthCensus:
    """Tally of depths over every homomorphism `(Z/a)^n -> G`."""

    n: int
    delta: float
    counts: dict[int, int]
    bounds: dict[int, float]
    maps: int

    @property
    def violations(self) -> list[int]:
        return [D for D, count in self.counts.items() if D > 1 and count > self.bounds.get(D, 0.0)]


def depth_census(
    n: int,
    a: int,
    G: AbelianGroup,
    P: Partition,
    delta: float | Sequence[float],
) -> DepthCensus | list[DepthCensus]:
    """Enumerate `Hom((Z/a)^n, G)`, tally depths and compare with the count bound.

    Input contract:
    - `|G[a]|^n` within `caps.census_maps`, where `G[a]` is the set of
      elements of order dividing `a`.
    - `delta` may be a list; subset indices are computed once per map.

    Output contract:
    - One `DepthCensus` per `delta`; every divisor `D > 1` of `|G|` has a
      count (possibly 0) and a bound with `K` the number of index-`D`
      subgroups.

    Side effects:
    - Fills the subgroup-lattice cache for `G`.
    """

    if P.ground_size != n:
        raise PreconditionViolated("partition does not cover the generators")
    realized = G.realize()
    torsion = [int(g) for g in np.flatnonzero(a % realized.element_orders() == 0)]
    total = len(torsion) ** n
    cap = get_settings().caps.census_maps
    if total > cap:
        raise CapExceeded(f"{total} homomorphisms exceed census cap {cap}")
    _check_blocks(P)
    deltas = [delta] if isinstance(delta, (int, float)) else list(delta)
    lattice = subgroup_lattice(realized)
    spans = SpanIndex(realized)
    divisors = [D for D in range(2, G.order + 1) if G.order % D == 0]
    tallies = [{D: 0 for D in [1, *divisors]} for _ in deltas]
    for map_id, assignment in enumerate(itertools.product(torsion, repeat=n)):
        candidates = _candidates(np.asarray(assignment, dtype=np.int64), P, spans)
        for tally, d in zip(tallies, deltas):
            tally[_depth_from_candidates(candidates, d, n, map_id).depth] += 1
    censuses = [
        DepthCensus(
            n=n,
            delta=d,
            counts=tally,
            bounds={
                D: count_depth_bound(n, D, d, G.order, lattice.count_of_index(D)) for D in divisors
            },
            maps=total,
        )
        for tally, d in zip(tallies, deltas)
    ]
    return censuses[0] if isinstance(delta, (int, float)) else censuses
