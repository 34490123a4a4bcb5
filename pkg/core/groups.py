"""Finite groups as validated Cayley tables.

Rules for this layer:
- The identity is always element index 0; every constructor normalizes to it.
- Groups, subgroups and homomorphisms are immutable after construction.
- Permutation groups compose right to left: `(s * t)(x) = s(t(x))`, so the
  walk product `X1 X2 X3` applies `X3` to a point first.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import threading
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from config.loader import get_settings
from core.errors import (
    CapExceeded,
    NoIdentity,
    NotAssociative,
    NotLatinSquare,
    NotNormal,
    PreconditionViolated,
)
from core.validator import (
    associativity_violations,
    identity_candidates,
    latin_square_violations,
    shape_violations,
)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.int64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, slots=True, eq=False)
class FiniteGroup:
    """Finite group given by its multiplication table.

    Input contract:
    - `table[g, h]` is the index of `g * h`; index 0 is the identity.
    - `inverse[g]` is the index of `g^-1`.
    - `permutations`, when present, holds 0-based point images per element.

    Output contract:
    - Shared read-only value; compare groups with `same_as`.

    Side effects:
    - None.
    """

    table: np.ndarray
    inverse: np.ndarray
    labels: tuple[str, ...]
    name: str = "G"
    permutations: np.ndarray | None = None

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    @property
    def identity(self) -> int:
        return 0

    @property
    def key(self) -> str:
        return hashlib.sha1(self.table.tobytes()).hexdigest()

    def same_as(self, other: FiniteGroup) -> bool:
        return self is other or (
            self.order == other.order and np.array_equal(self.table, other.table)
        )

    def multiply(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise PreconditionViolated(f"{self.name} has no element {label!r}") from exc

    def element_orders(self) -> np.ndarray:
        """Return the order of every element."""

        span = np.arange(self.order)
        power = span.copy()
        orders = np.zeros(self.order, dtype=np.int64)
        for k in range(1, self.order + 1):
            done = (power == 0) & (orders == 0)
            orders[done] = k
            if orders.all():
                break
            power = self.table[power, span]
        return orders

    def exponent(self) -> int:
        return reduce(math.lcm, (int(o) for o in self.element_orders()), 1)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def act(self, g: int, point: int) -> int:
        """Image of a 0-based point under a permutation element."""

        if self.permutations is None:
            raise PreconditionViolated(f"{self.name} carries no permutation action")
        return int(self.permutations[g, point])

    def to_json(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "table": self.table.tolist(),
            "labels": list(self.labels),
        }


def _build_group(
    table: np.ndarray,
    labels: Sequence[str] | None,
    name: str,
    permutations: np.ndarray | None = None,
) -> FiniteGroup:
    """Wrap an already-valid table with identity at index 0."""

    table = _readonly(table)
    inverse = _readonly(np.nonzero(table == 0)[1])
    if labels is None:
        labels = [str(i) for i in range(table.shape[0])]
    perms = None if permutations is None else _readonly(permutations)
    return FiniteGroup(
        table=table,
        inverse=inverse,
        labels=tuple(str(label) for label in labels),
        name=name,
        permutations=perms,
    )


def from_cayley_table(
    table: Sequence[Sequence[int]] | np.ndarray,
    labels: Sequence[str] | None = None,
    name: str = "G",
) -> FiniteGroup:
    """Validate a raw Cayley table and build a group with identity at 0.

    Input contract:
    - `table` is square with entries in `0..order-1`.
    - `labels`, when given, has one string per element.

    Output contract:
    - Returns a `FiniteGroup`; when the identity is not element 0 it is
      swapped with element 0 and labels follow their elements.

    Side effects:
    - None.

    Raises `NotLatinSquare`, `NoIdentity` or `NotAssociative`, naming the
    failing cell or triple.
    """

    raw = np.asarray(table, dtype=np.int64)
    problems = shape_violations(raw)
    if problems:
        raise NotLatinSquare(problems[0])
    problems = latin_square_violations(raw)
    if problems:
        raise NotLatinSquare(problems[0])
    candidates = identity_candidates(raw)
    if not candidates:
        raise NoIdentity("no element acts as a two-sided identity")
    problems = associativity_violations(raw)
    if problems:
        raise NotAssociative(problems[0])

    order = raw.shape[0]
    if labels is not None and len(labels) != order:
        raise PreconditionViolated(f"expected {order} labels, got {len(labels)}")
    e = candidates[0]
    if e != 0:
        perm = np.arange(order)
        perm[[0, e]] = perm[[e, 0]]
        raw = perm[raw[np.ix_(perm, perm)]]
        if labels is not None:
            labels = [labels[int(i)] for i in perm]
    return _build_group(raw, labels, name)


def group_from_json(payload: dict[str, Any]) -> FiniteGroup:
    """Build a group from `{order, table, labels}`."""

    table = payload["table"]
    if int(payload.get("order", len(table))) != len(table):
        raise PreconditionViolated("`order` does not match table size")
    return from_cayley_table(table, payload.get("labels"), str(payload.get("name", "G")))


def load_group(path: str | Path) -> FiniteGroup:
    return group_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def trivial_group() -> FiniteGroup:
    return _build_group(np.zeros((1, 1), dtype=np.int64), ["e"], "1")


def cyclic_group(n: int) -> FiniteGroup:
    """Return `Z/n` with `g * h = (g + h) mod n`."""

    if n < 1:
        raise PreconditionViolated(f"cyclic group order must be positive, got {n}")
    span = np.arange(n)
    return _build_group((span[:, None] + span[None, :]) % n, None, f"Z{n}")


def direct_product(left: FiniteGroup, right: FiniteGroup) -> FiniteGroup:
    """Return `left x right` with element `(g, h)` at index `g * |right| + h`."""

    m = right.order
    table = left.table[:, None, :, None] * m + right.table[None, :, None, :]
    size = left.order * m
    labels = [f"({a},{b})" for a in left.labels for b in right.labels]
    return _build_group(table.reshape(size, size), labels, f"{left.name}x{right.name}")


def dihedral_group(n: int) -> FiniteGroup:
    """Return the dihedral group of order `2n`.

    Element `r^a s^f` sits at index `f * n + a`, and
    `(r^a s^f)(r^b s^g) = r^(a + (-1)^f b) s^(f + g)`.
    """

    if n < 3:
        raise PreconditionViolated(f"dihedral group needs n >= 3, got {n}")
    flips, rotations = np.divmod(np.arange(2 * n), n)
    sign = np.where(flips == 1, -1, 1)
    rot = (rotations[:, None] + sign[:, None] * rotations[None, :]) % n
    flip = (flips[:, None] + flips[None, :]) % 2
    labels = []
    for f, a in zip(flips, rotations):
        parts = [] if a == 0 else ["r" if a == 1 else f"r^{a}"]
        if f:
            parts.append("s")
        labels.append(" ".join(parts) or "e")
    return _build_group(flip * n + rot, labels, f"D{2 * n}")


_QUATERNION_UNITS = {
    # (x, y) -> (negated, unit) for x * y with units 1, i, j, k
    (1, 1): (1, 0), (1, 2): (0, 3), (1, 3): (1, 2),
    (2, 1): (1, 3), (2, 2): (1, 0), (2, 3): (0, 1),
    (3, 1): (0, 2), (3, 2): (1, 1), (3, 3): (1, 0),
}


def quaternion_group() -> FiniteGroup:
    """Return `Q8` with `+-x` at index `4 * negated + unit`."""

    table = np.zeros((8, 8), dtype=np.int64)
    for g, h in itertools.product(range(8), repeat=2):
        neg_g, unit_g = divmod(g, 4)
        neg_h, unit_h = divmod(h, 4)
        if unit_g == 0 or unit_h == 0:
            neg, unit = 0, unit_g + unit_h
        else:
            neg, unit = _QUATERNION_UNITS[(unit_g, unit_h)]
        table[g, h] = 4 * ((neg + neg_g + neg_h) % 2) + unit
    labels = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
    return _build_group(table, labels, "Q8")


def cycle_notation(images: Sequence[int]) -> str:
    """Render 0-based point images as 1-based disjoint cycles."""

    seen: set[int] = set()
    cycles: list[str] = []
    for start in range(len(images)):
        if start in seen or images[start] == start:
            seen.add(start)
            continue
        cycle = [start]
        seen.add(start)
        point = images[start]
        while point != start:
            cycle.append(point)
            seen.add(point)
            point = images[point]
        cycles.append("(" + " ".join(str(p + 1) for p in cycle) + ")")
    return "".join(cycles) or "e"


def _parity(images: Sequence[int]) -> int:
    inversions = sum(
        1 for i, j in itertools.combinations(range(len(images)), 2) if images[i] > images[j]
    )
    return inversions % 2


def alternating_group_5() -> FiniteGroup:
    """Return `A5` acting on `{1..5}`, elements in lexicographic image order.

    Labels are cycle notation (`"e"` for the identity). Products compose right
    to left, so `(1 2 3)(1 2 4) = (1 3)(2 4)`.
    """

    perms = np.array(
        [p for p in itertools.permutations(range(5)) if _parity(p) == 0],
        dtype=np.int64,
    )
    position = {tuple(p): i for i, p in enumerate(perms.tolist())}
    table = np.empty((60, 60), dtype=np.int64)
    for g in range(60):
        composed = perms[g][perms]
        for h in range(60):
            table[g, h] = position[tuple(composed[h].tolist())]
    labels = [cycle_notation(p) for p in perms.tolist()]
    return _build_group(table, labels, "A5", permutations=perms)


def builtin_group(name: str) -> FiniteGroup:
    """Parse names like `Z6`, `D8`, `Q8`, `A5` and products `Z2xD8`.

    Dihedral names use the group order, so `D8` is the symmetry group of
    the square.
    """

    factors: list[FiniteGroup] = []
    for token in name.replace(" ", "").split("x"):
        if token in ("1", "trivial"):
            factors.append(trivial_group())
        elif token == "Q8":
            factors.append(quaternion_group())
        elif token == "A5":
            factors.append(alternating_group_5())
        elif token[:1] in ("Z", "C") and token[1:].isdigit():
            factors.append(cyclic_group(int(token[1:])))
        elif token[:1] == "D" and token[1:].isdigit() and int(token[1:]) % 2 == 0:
            factors.append(dihedral_group(int(token[1:]) // 2))
        else:
            raise PreconditionViolated(f"unknown group name {token!r} in {name!r}")
    return reduce(direct_product, factors)


@dataclass(frozen=True, slots=True, eq=False)
class Subgroup:
    """Subgroup of `parent` given by its sorted element indices.

    Input contract:
    - `elements` is sorted, contains 0, and is closed in `parent`.

    Output contract:
    - Equality and hashing use the element set within the same parent.

    Side effects:
    - None.
    """

    parent: FiniteGroup
    elements: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    def as_array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.parent.order, dtype=bool)
        mask[list(self.elements)] = True
        return mask

    def __contains__(self, g: object) -> bool:
        return g in set(self.elements)

    def issubset(self, other: Subgroup) -> bool:
        return set(self.elements) <= set(other.elements)

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_whole(self) -> bool:
        return self.order == self.parent.order

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.elements == other.elements and self.parent.same_as(other.parent)

    def __hash__(self) -> int:
        return hash((self.parent.order, self.elements))

    def __repr__(self) -> str:
        return f"Subgroup({self.parent.name}, order={self.order})"


def whole_group(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, tuple(range(G.order)))


def subgroup_from_elements(G: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    """Validate closure of an explicit element set."""

    members = np.unique(np.asarray(list(elements), dtype=np.int64))
    if members.size == 0 or members[0] != 0:
        raise PreconditionViolated("subgroup must contain the identity")
    mask = np.zeros(G.order, dtype=bool)
    mask[members] = True
    if not mask[G.table[np.ix_(members, members)]].all() or not mask[G.inverse[members]].all():
        raise PreconditionViolated("element set is not closed under the group law")
    return Subgroup(G, tuple(int(g) for g in members))


def _closure(G: FiniteGroup, seed: np.ndarray, gens: np.ndarray) -> np.ndarray:
    """Boolean mask of the subgroup generated by `seed` and `gens`."""

    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    mask[seed] = True
    generators = np.unique(np.concatenate([seed, gens]).astype(np.int64))
    frontier = np.flatnonzero(mask)
    while frontier.size and generators.size:
        products = np.unique(G.table[np.ix_(frontier, generators)].ravel())
        fresh = products[~mask[products]]
        mask[fresh] = True
        frontier = fresh
    return mask


def generated_subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    """Return the least subgroup containing `gens` by worklist closure.

    Input contract:
    - `gens` are valid element indices; may be empty.

    Output contract:
    - The trivial subgroup for empty `gens`.

    Side effects:
    - None.
    """

    generators = np.asarray(sorted(set(int(g) for g in gens)), dtype=np.int64)
    if generators.size and (generators.min() < 0 or generators.max() >= G.order):
        raise PreconditionViolated("generator index out of range")
    mask = _closure(G, np.zeros(0, dtype=np.int64), generators)
    return Subgroup(G, tuple(int(g) for g in np.flatnonzero(mask)))


def subgroup_as_group(H: Subgroup) -> FiniteGroup:
    """Re-index `H` as a standalone group; element `i` is `H.elements[i]`."""

    members = H.as_array()
    position = np.zeros(H.parent.order, dtype=np.int64)
    position[members] = np.arange(H.order)
    table = position[H.parent.table[np.ix_(members, members)]]
    labels = [H.parent.labels[int(g)] for g in members]
    return _build_group(table, labels, f"{H.parent.name}|{H.order}")


def is_normal(G: FiniteGroup, H: Subgroup) -> bool:
    """Return whether `g H g^-1 = H` for every `g`."""

    members = H.as_array()
    span = np.arange(G.order)
    conjugates = G.table[G.table[np.ix_(span, members)], G.inverse[:, None]]
    return bool(H.mask()[conjugates].all())


def left_cosets(G: FiniteGroup, H: Subgroup) -> list[tuple[int, ...]]:
    """Partition `G` into left cosets `gH`.

    Input contract:
    - `H` is a subgroup of `G`.

    Output contract:
    - Cosets ordered by their least element, each sorted; `H` comes first.

    Side effects:
    - None.
    """

    members = H.as_array()
    assigned = np.zeros(G.order, dtype=bool)
    cosets: list[tuple[int, ...]] = []
    for g in range(G.order):
        if assigned[g]:
            continue
        coset = np.sort(G.table[g, members])
        assigned[coset] = True
        cosets.append(tuple(int(x) for x in coset))
    return cosets


def coset_index(G: FiniteGroup, H: Subgroup) -> np.ndarray:
    """Map each element to the position of its left coset in `left_cosets`."""

    index = np.empty(G.order, dtype=np.int64)
    for position, coset in enumerate(left_cosets(G, H)):
        index[list(coset)] = position
    return index


@dataclass(frozen=True, slots=True, eq=False)
class Homomorphism:
    """Group homomorphism given by its element map.

    Input contract:
    - `mapping[g]` is the image index of source element `g`.

    Output contract:
    - Construction fails with `PreconditionViolated` when the map does not
      respect the group law.

    Side effects:
    - None.
    """

    source: FiniteGroup
    target: FiniteGroup
    mapping: np.ndarray
    surjective: bool = field(init=False)

    def __post_init__(self) -> None:
        mapping = _readonly(self.mapping)
        if mapping.shape != (self.source.order,):
            raise PreconditionViolated("homomorphism map has the wrong length")
        if mapping.min() < 0 or mapping.max() >= self.target.order or mapping[0] != 0:
            raise PreconditionViolated("homomorphism must send identity to identity")
        images_of_products = mapping[self.source.table]
        products_of_images = self.target.table[np.ix_(mapping, mapping)]
        bad = np.argwhere(images_of_products != products_of_images)
        if bad.size:
            g, h = (int(v) for v in bad[0])
            raise PreconditionViolated(f"map breaks the group law at ({g}, {h})")
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(
            self, "surjective", bool(np.unique(mapping).size == self.target.order)
        )

    def kernel(self) -> Subgroup:
        return Subgroup(self.source, tuple(int(g) for g in np.flatnonzero(self.mapping == 0)))

    def image(self) -> Subgroup:
        return Subgroup(self.target, tuple(int(g) for g in np.unique(self.mapping)))

    def then(self, outer: Homomorphism) -> Homomorphism:
        """Return `outer o self`."""

        if not self.target.same_as(outer.source):
            raise PreconditionViolated("cannot compose: target and source differ")
        return Homomorphism(self.source, outer.target, outer.mapping[self.mapping])

    def image_of(self, H: Subgroup) -> Subgroup:
        return Subgroup(self.target, tuple(int(g) for g in np.unique(self.mapping[H.as_array()])))


def identity_homomorphism(G: FiniteGroup) -> Homomorphism:
    return Homomorphism(G, G, np.arange(G.order))


def quotient(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, Homomorphism]:
    """Return `G/N` and the canonical surjection.

    Input contract:
    - `N` is normal in `G`.

    Output contract:
    - Coset `i` of the quotient is the `i`-th entry of `left_cosets(G, N)`,
      represented by its least element index; the identity coset is 0.

    Side effects:
    - None.
    """

    if not is_normal(G, N):
        raise NotNormal(f"subgroup of order {N.order} is not normal in {G.name}")
    cosets = left_cosets(G, N)
    representatives = np.array([coset[0] for coset in cosets], dtype=np.int64)
    index = coset_index(G, N)
    table = index[G.table[np.ix_(representatives, representatives)]]
    labels = [G.labels[int(r)] if N.order == 1 else f"[{G.labels[int(r)]}]" for r in representatives]
    Q = _build_group(table, labels, f"{G.name}/N{N.order}")
    return Q, Homomorphism(G, Q, index)


@dataclass(frozen=True, slots=True, eq=False)
class SubgroupLattice:
    """All subgroups of a group with their inclusion relation.

    Input contract:
    - `subgroups` is sorted by order, then by element tuple.
    - `contains[i, j]` is true when subgroup `i` is contained in subgroup `j`.

    Output contract:
    - The trivial subgroup is first and the whole group last.

    Side effects:
    - None.
    """

    group: FiniteGroup
    subgroups: tuple[Subgroup, ...]
    contains: np.ndarray

    def __len__(self) -> int:
        return len(self.subgroups)

    def __iter__(self):
        return iter(self.subgroups)

    def position(self, H: Subgroup) -> int:
        return self.subgroups.index(H)

    def proper(self) -> list[Subgroup]:
        return list(self.subgroups[:-1])

    def maximal(self) -> list[Subgroup]:
        """Proper subgroups contained in no other proper subgroup."""

        top = len(self.subgroups) - 1
        result = []
        for i in range(top):
            above = np.flatnonzero(self.contains[i])
            if all(j in (i, top) for j in above):
                result.append(self.subgroups[i])
        return result

    def normal_subgroups(self) -> list[Subgroup]:
        return [H for H in self.subgroups if is_normal(self.group, H)]

    def count_of_index(self, index: int) -> int:
        return sum(1 for H in self.subgroups if H.index == index)

    def mobius_to_top(self) -> list[int]:
        """Moebius values `mu(H, G)` for every listed subgroup."""

        size = len(self.subgroups)
        values = [0] * size
        values[-1] = 1
        for i in range(size - 2, -1, -1):
            values[i] = -sum(
                values[j] for j in range(i + 1, size) if self.contains[i, j]
            )
        return values


_LATTICE_CACHE: dict[str, SubgroupLattice] = {}
_LATTICE_LOCK = threading.Lock()


def _cache_file(G: FiniteGroup) -> Path | None:
    cache_dir = get_settings().cache_dir
    return None if cache_dir is None else cache_dir / f"lattice-{G.key}.json"


def _enumerate_subgroups(G: FiniteGroup) -> list[tuple[int, ...]]:
    """Cyclic-extension closure: grow known subgroups by one element."""

    cyclic: dict[tuple[int, ...], int] = {}
    for g in range(G.order):
        mask = _closure(G, np.zeros(0, dtype=np.int64), np.array([g]))
        cyclic.setdefault(tuple(int(x) for x in np.flatnonzero(mask)), g)

    known = {members: [gen] for members, gen in cyclic.items()}
    frontier = list(known)
    while frontier:
        fresh: list[tuple[int, ...]] = []
        for members in frontier:
            member_set = set(members)
            gens = np.asarray(known[members], dtype=np.int64)
            for cyclic_members, g in cyclic.items():
                if g in member_set:
                    continue
                mask = _closure(G, gens, np.array([g]))
                grown = tuple(int(x) for x in np.flatnonzero(mask))
                if grown not in known:
                    known[grown] = known[members] + [g]
                    fresh.append(grown)
        frontier = fresh
    return sorted(known, key=lambda members: (len(members), members))


def _build_lattice(G: FiniteGroup, listed: list[tuple[int, ...]]) -> SubgroupLattice:
    subgroups = tuple(Subgroup(G, members) for members in listed)
    masks = np.array([H.mask() for H in subgroups])
    overlap = masks.astype(np.int64) @ masks.T.astype(np.int64)
    sizes = masks.sum(axis=1)
    contains = overlap == sizes[:, None]
    contains.setflags(write=False)
    return SubgroupLattice(group=G, subgroups=subgroups, contains=contains)


def subgroup_lattice(G: FiniteGroup, cap: int | None = None) -> SubgroupLattice:
    """Enumerate every subgroup of `G` with its inclusion relation.

    Input contract:
    - `|G|` must not exceed `cap` (default from settings).

    Output contract:
    - Returns the memoized `SubgroupLattice`; repeated calls for equal
      tables return the same object.

    Side effects:
    - Fills the in-process cache once per table under a lock.
    - Reads and writes `COKERNEL_CACHE_DIR` when configured.
    """

    limit = cap if cap is not None else get_settings().caps.subgroup_lattice_order
    if G.order > limit:
        raise CapExceeded(f"subgroup lattice of order {G.order} exceeds cap {limit}")
    key = G.key
    with _LATTICE_LOCK:
        cached = _LATTICE_CACHE.get(key)
        if cached is not None:
            return cached
        cache_path = _cache_file(G)
        if cache_path is not None and cache_path.exists():
            listed = [tuple(members) for members in json.loads(cache_path.read_text())]
        else:
            listed = _enumerate_subgroups(G)
            if cache_path is not None:
                cache_path.parent.mkdir(parents=True, exist_ok=True)
                cache_path.write_text(json.dumps([list(m) for m in listed]))
        lattice = _build_lattice(G, listed)
        _LATTICE_CACHE[key] = lattice
        return lattice
