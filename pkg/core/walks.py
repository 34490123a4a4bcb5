"""Mixing bounds for time-inhomogeneous random walks along quotient chains.

Rules for this layer:
- Walks multiply left to right: `nu_n = mu_1 * ... * mu_n` starting from
  the Dirac measure at the identity.
- Levels `j` and steps `i` are reported 1-based.
- Infeasible instances (some level without steps) get `rhs = inf` instead
  of an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from config.loader import get_settings
from core.errors import (
    ChainMismatch,
    GroupMismatch,
    NotGenerating,
    NotNormal,
    NotNormalInQuotient,
    PreconditionViolated,
)
from core.groups import (
    FiniteGroup,
    Homomorphism,
    Subgroup,
    alternating_group_5,
    dihedral_group,
    generated_subgroup,
    identity_homomorphism,
    is_normal,
    quotient,
    subgroup_lattice,
    whole_group,
)
from core.measures import (
    SignedMeasure,
    convolve,
    convolve_exact,
    dirac,
    from_mapping,
    is_probability,
    project_coset_uniform,
    pushforward,
    random_probability,
    uniform,
    uniform_on,
)
from core.spectral import second_singular_value
from core.types import BoundReport


@dataclass(frozen=True, slots=True)
class QuotientChain:
    """Tower `G = G_0 -> G_1 -> ... -> G_k = {e}` of surjections.

    Input contract:
    - `maps[j-1]` is `Q_j: G_{j-1} -> G_j`, surjective.
    - `composed[j]` is `Q_j o ... o Q_1`; `composed[0]` is the identity.
    - `kernels[j-1]` is `H_j = ker Q_j` inside `G_{j-1}`.

    Output contract:
    - `groups[-1]` has order 1.

    Side effects:
    - None.
    """

    groups: tuple[FiniteGroup, ...]
    maps: tuple[Homomorphism, ...]
    composed: tuple[Homomorphism, ...]
    kernels: tuple[Subgroup, ...]

    @property
    def depth(self) -> int:
        return len(self.maps)

    @property
    def top(self) -> FiniteGroup:
        return self.groups[0]


def _chain_by_kernels(
    G: FiniteGroup,
    choose: Callable[[FiniteGroup, Homomorphism, int], Subgroup | None],
) -> QuotientChain:
    """Grow a chain by quotienting the current group by chosen kernels.

    `choose(current, composed, level)` returns the next kernel, or `None`
    to stop.
    """

    groups = [G]
    maps: list[Homomorphism] = []
    composed = [identity_homomorphism(G)]
    kernels: list[Subgroup] = []
    level = 1
    while True:
        kernel = choose(groups[-1], composed[-1], level)
        if kernel is None:
            break
        target, q = quotient(groups[-1], kernel)
        groups.append(target)
        maps.append(q)
        composed.append(composed[-1].then(q))
        kernels.append(kernel)
        level += 1
    return QuotientChain(tuple(groups), tuple(maps), tuple(composed), tuple(kernels))


def chain_from_family(G: FiniteGroup, family: Sequence[Subgroup]) -> QuotientChain:
    """Build `G -> G/H_1 -> G/H_1 H_2 -> ...` from subgroups of `G`.

    Input contract:
    - The union of `family` generates `G`.
    - The image of each `H_j` in `G/H_1...H_{j-1}` is normal there.

    Output contract:
    - A chain with one level per family member.

    Side effects:
    - None.
    """

    generators = sorted({g for H in family for g in H.elements})
    if generated_subgroup(G, generators).order != G.order:
        raise NotGenerating("family does not generate the group")

    def choose(current: FiniteGroup, to_current: Homomorphism, level: int) -> Subgroup | None:
        if level > len(family):
            return None
        image = to_current.image_of(family[level - 1])
        if not is_normal(current, image):
            raise NotNormalInQuotient(
                f"image of family member {level} is not normal in {current.name}"
            )
        return image

    chain = _chain_by_kernels(G, choose)
    if chain.groups[-1].order != 1:
        raise NotGenerating("product of the family is a proper subgroup")
    return chain


def quotient_chain(G: FiniteGroup, ascending: Sequence[Subgroup]) -> QuotientChain:
    """Chain from an ascending series `N_1 < N_2 < ... < N_k = G` of normal subgroups."""

    for N in ascending:
        if not is_normal(G, N):
            raise NotNormal(f"series member of order {N.order} is not normal")
    for lower, upper in zip(ascending, ascending[1:]):
        if not lower.issubset(upper):
            raise PreconditionViolated("normal series is not ascending")
    return chain_from_family(G, ascending)


def greedy_chain(G: FiniteGroup) -> QuotientChain:
    """Non-canonical chain: quotient by the largest proper nontrivial normal subgroup.

    A simple group is quotiented by itself in one step.
    """

    def choose(current: FiniteGroup, _: Homomorphism, __: int) -> Subgroup | None:
        if current.order == 1:
            return None
        lattice = subgroup_lattice(current)
        candidates = [
            N for N in lattice.normal_subgroups() if 1 < N.order < current.order
        ]
        if not candidates:
            return lattice.subgroups[-1]
        return max(candidates, key=lambda N: (N.order, N.elements))

    return _chain_by_kernels(G, choose)


def random_normal_chain(G: FiniteGroup, rng: np.random.Generator) -> QuotientChain:
    """Chain from a random maximal-length ascending series of normal subgroups."""

    normals = subgroup_lattice(G).normal_subgroups()
    series: list[Subgroup] = []
    current = normals[0]
    while current.order < G.order:
        above = [N for N in normals if current.issubset(N) and N.order > current.order]
        minimal = [N for N in above if not any(M.order < N.order and M.issubset(N) for M in above)]
        current = minimal[int(rng.integers(len(minimal)))]
        series.append(current)
    return quotient_chain(G, series)


@dataclass(frozen=True, slots=True)
class WalkInstance:
    """Ordered probability steps on one group."""

    group: FiniteGroup
    steps: tuple[SignedMeasure, ...]

    def __post_init__(self) -> None:
        for index, step in enumerate(self.steps, start=1):
            if not step.group.same_as(self.group):
                raise GroupMismatch(f"step {index} lives on another group")
            if not is_probability(step):
                raise PreconditionViolated(f"step {index} is not a probability measure")


def walk_distribution(w: WalkInstance) -> SignedMeasure:
    """Return `nu_n`, folding `convolve` left to right from `dirac(e)`."""

    nu = dirac(w.group)
    for step in w.steps:
        nu = convolve(nu, step)
    return nu


def walk_distribution_exact(w: WalkInstance) -> list[Fraction]:
    """Rational `nu_n`; float weights convert exactly."""

    nu = [Fraction(0)] * w.group.order
    nu[0] = Fraction(1)
    for step in w.steps:
        nu = convolve_exact(nu, [Fraction(float(x)) for x in step.weights], w.group)
    return nu


def exact_walk_distance(w: WalkInstance) -> float:
    """Return `||nu_n - pi||^2`.

    Input contract:
    - `w` may have zero steps.

    Output contract:
    - `1 - 1/|G|` for the empty walk; rational evaluation when
      `numerics.exact_arithmetic` is set.

    Side effects:
    - None.
    """

    if get_settings().numerics.exact_arithmetic:
        share = Fraction(1, w.group.order)
        return float(sum((x - share) ** 2 for x in walk_distribution_exact(w)))
    nu = walk_distribution(w)
    return float(np.sum((nu.weights - 1.0 / w.group.order) ** 2))


def _check_chain(w: WalkInstance, chain: QuotientChain) -> None:
    if not chain.top.same_as(w.group):
        raise ChainMismatch(f"chain starts at {chain.top.name}, walk lives on {w.group.name}")


def _classify_with_sigma(
    w: WalkInstance, chain: QuotientChain
) -> tuple[dict[int, list[int]], dict[tuple[int, int], float]]:
    classification: dict[int, list[int]] = {}
    sigmas: dict[tuple[int, int], float] = {}
    for j in range(1, chain.depth + 1):
        level_group = chain.groups[j - 1]
        kernel = chain.kernels[j - 1]
        members: list[int] = []
        for i, step in enumerate(w.steps, start=1):
            pushed = pushforward(chain.composed[j - 1], step)
            if generated_subgroup(level_group, pushed.support()) == kernel:
                members.append(i)
                sigmas[(j, i)] = second_singular_value(pushed).second_largest
        classification[j] = members
    return classification, sigmas


def classify_steps(w: WalkInstance, chain: QuotientChain) -> dict[int, list[int]]:
    """Return `j -> I_j`: steps whose pushed support generates exactly `H_j`.

    Input contract:
    - `chain` starts at `w.group`.

    Output contract:
    - Every level `1..k` is a key; a step may appear at several levels.

    Side effects:
    - None.
    """

    _check_chain(w, chain)
    classification, _ = _classify_with_sigma(w, chain)
    return classification


def strong_walk_bound(w: WalkInstance, chain: QuotientChain) -> BoundReport:
    """Compare the exact distance with the quotient-chain bound.

    Input contract:
    - `chain` starts at `w.group`.

    Output contract:
    - `rhs = sum_j ((|G_{j-1}| - 1)/|G|) prod_{i in I_j} sigma_i^2` where
      `sigma_i` is the second singular value of the pushed step on `H_j`.
    - `rhs = inf` and `feasible = False` when some `I_j` is empty.

    Side effects:
    - None.
    """

    _check_chain(w, chain)
    classification, sigmas = _classify_with_sigma(w, chain)
    order = w.group.order
    level_products: dict[int, float] = {}
    per_step_sigma: dict[int, float] = {}
    for (j, i), sigma in sorted(sigmas.items()):
        per_step_sigma.setdefault(i, sigma)
    for j, members in classification.items():
        level_products[j] = math.prod(sigmas[(j, i)] ** 2 for i in members)

    feasible = all(classification.values())
    rhs = math.inf
    if feasible:
        rhs = sum(
            (chain.groups[j - 1].order - 1) / order * level_products[j]
            for j in classification
        )
    return BoundReport(
        lhs=exact_walk_distance(w),
        rhs=rhs,
        step_classification=classification,
        per_step_sigma=per_step_sigma,
        feasible=feasible,
        level_products=level_products,
    )


def normal_family_bound(w: WalkInstance, family: Sequence[Subgroup]) -> BoundReport:
    """Bound a walk through a family of subgroups with normal successive images.

    Input contract:
    - `family` satisfies the hypotheses of `chain_from_family`.

    Output contract:
    - `rhs` is the quotient-chain bound along `G -> G/H_1 -> ...`.
    - `corollary_rhs = (sum_j prod_{i in I_{H_j}} sigma_i)^2` where step `i`
      belongs to `I_{H_j}` when its support generates `H_j` in `G` and
      `sigma_i` acts on `H_j`; `inf` when some `I_{H_j}` is empty.

    Side effects:
    - None.
    """

    chain = chain_from_family(w.group, family)
    report = strong_walk_bound(w, chain)

    total = 0.0
    for H in family:
        members = [
            step
            for step in w.steps
            if generated_subgroup(w.group, step.support()) == H
        ]
        if not members:
            total = math.inf
            break
        total += math.prod(second_singular_value(step).second_largest for step in members)
    report.corollary_rhs = total**2
    return report


def subspace_distance_bound(w: WalkInstance, H: Subgroup) -> tuple[float, float]:
    """Return `(d(nu_n, M_H)^2, ((|G|-1)/|G|) prod_{i in I_H} sigma_i^2)` for normal `H`."""

    if not is_normal(w.group, H):
        raise NotNormal("subspace contraction needs a normal subgroup")
    measured = project_coset_uniform(walk_distribution(w), H).residual_norm ** 2
    product = math.prod(
        second_singular_value(step).second_largest ** 2
        for step in w.steps
        if generated_subgroup(w.group, step.support()) == H
    )
    order = w.group.order
    return measured, (order - 1) / order * product


def random_feasible_steps(
    chain: QuotientChain,
    rng: np.random.Generator,
    extra_steps: int = 2,
) -> WalkInstance:
    """Random walk with at least one step classified at every chain level.

    For level `j` a step is drawn on a random subset of the preimage of
    `H_j`, kept only when its pushed support still generates `H_j`;
    otherwise the whole preimage is used. `extra_steps` unconstrained
    steps are mixed in and the order is shuffled.
    """

    G = chain.top
    steps: list[SignedMeasure] = []
    for j in range(1, chain.depth + 1):
        to_level = chain.composed[j - 1]
        kernel_mask = chain.kernels[j - 1].mask()
        preimage = np.flatnonzero(kernel_mask[to_level.mapping])
        size = int(rng.integers(1, preimage.size + 1))
        support = rng.choice(preimage, size=size, replace=False)
        step = random_probability(G, rng, support)
        pushed = pushforward(to_level, step)
        if generated_subgroup(chain.groups[j - 1], pushed.support()) != chain.kernels[j - 1]:
            step = random_probability(G, rng, preimage)
        steps.append(step)
    for _ in range(extra_steps):
        size = int(rng.integers(1, G.order + 1))
        steps.append(random_probability(G, rng, rng.choice(G.order, size=size, replace=False)))
    order = rng.permutation(len(steps))
    return WalkInstance(G, tuple(steps[int(k)] for k in order))


def dihedral_walk(
    n: int,
    p: float,
    k: int,
    rotation: dict[int | str, float] | None = None,
) -> tuple[WalkInstance, QuotientChain]:
    """Alternate a rotation step with a coin flip `{e: 1-p, s: p}`, `2k` steps.

    Returns the walk and the chain `D_2n -> D_2n/<r> -> 1`. The default
    rotation step is the lazy walk `{e: 1/2, r: 1/2}`.
    """

    G = dihedral_group(n)
    rotation_step = from_mapping(G, rotation or {"e": 0.5, "r": 0.5})
    flip_step = from_mapping(G, {"e": 1.0 - p, "s": p})
    steps = tuple(rotation_step if i % 2 == 0 else flip_step for i in range(2 * k))
    rotations = generated_subgroup(G, [G.index_of("r")])
    chain = quotient_chain(G, [rotations, whole_group(G)])
    return WalkInstance(G, steps), chain


def a5_counterexample() -> tuple[WalkInstance, list[Subgroup]]:
    """Uniform steps on `<(1 2 3)>`, `<(1 2 4)>`, `<(1 2 5)>` in `A5`."""

    G = alternating_group_5()
    family = [
        generated_subgroup(G, [G.index_of(label)])
        for label in ("(1 2 3)", "(1 2 4)", "(1 2 5)")
    ]
    steps = tuple(uniform_on(G, H) for H in family)
    return WalkInstance(G, steps), family


def a5_counterexample_probability(exact: bool = True) -> float:
    """Probability that `X1 X2 X3` maps 3 to 4 in the three-cycle walk.

    Input contract:
    - `exact` selects rational convolution over floating point.

    Output contract:
    - Returns 0.0: `X3` and `X2` fix 3 and `X1` keeps it in `{1, 2, 3}`.

    Side effects:
    - None.
    """

    walk, _ = a5_counterexample()
    G = walk.group
    hits = [g for g in range(G.order) if G.act(g, 2) == 3]
    if exact:
        nu = walk_distribution_exact(walk)
        return float(sum(nu[g] for g in hits))
    nu = walk_distribution(walk)
    return float(nu.weights[hits].sum())


def a5_uniform_reference() -> float:
    """Uniform probability that an element of `A5` maps 3 to 4 (1/5)."""

    G = alternating_group_5()
    pi = uniform(G)
    return float(sum(pi.weights[g] for g in range(G.order) if G.act(g, 2) == 3))
