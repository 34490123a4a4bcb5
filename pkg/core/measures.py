"""Signed measures on finite groups.

Measures are dense weight vectors indexed by element. All operations are pure
and return new measures; weights are stored read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from config.loader import get_settings
from core.errors import GroupMismatch, PreconditionViolated
from core.groups import (
    FiniteGroup,
    Homomorphism,
    Subgroup,
    coset_index,
    direct_product,
)
from core.types import SubspaceProjection
from core.validator import probability_violations


@dataclass(frozen=True, slots=True, eq=False)
class SignedMeasure:
    """Dense real-valued function on the elements of a group.

    Input contract:
    - `weights` has one finite entry per element of `group`.

    Output contract:
    - Supports `+`, `-` and scalar `*`; all return new measures.

    Side effects:
    - None.
    """

    group: FiniteGroup
    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        if weights.shape != (self.group.order,):
            raise PreconditionViolated(
                f"expected {self.group.order} weights, got shape {weights.shape}"
            )
        if not np.isfinite(weights).all():
            raise PreconditionViolated("measure weights must be finite")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def support(self, tolerance: float | None = None) -> tuple[int, ...]:
        cutoff = get_settings().tolerances.support if tolerance is None else tolerance
        return tuple(int(g) for g in np.flatnonzero(np.abs(self.weights) > cutoff))

    def _check(self, other: SignedMeasure) -> None:
        if not self.group.same_as(other.group):
            raise GroupMismatch(f"measures live on {self.group.name} and {other.group.name}")

    def __add__(self, other: SignedMeasure) -> SignedMeasure:
        self._check(other)
        return SignedMeasure(self.group, self.weights + other.weights)

    def __sub__(self, other: SignedMeasure) -> SignedMeasure:
        self._check(other)
        return SignedMeasure(self.group, self.weights - other.weights)

    def __mul__(self, scalar: float) -> SignedMeasure:
        return SignedMeasure(self.group, self.weights * float(scalar))

    __rmul__ = __mul__

    def allclose(self, other: SignedMeasure, tolerance: float | None = None) -> bool:
        self._check(other)
        atol = get_settings().tolerances.measure if tolerance is None else tolerance
        return bool(np.allclose(self.weights, other.weights, rtol=0.0, atol=atol))

    def to_json(self) -> dict[str, Any]:
        return {"group_ref": self.group.name, "weights": self.weights.tolist()}


def dirac(G: FiniteGroup, g: int = 0) -> SignedMeasure:
    if not 0 <= g < G.order:
        raise PreconditionViolated(f"element {g} not in {G.name}")
    weights = np.zeros(G.order)
    weights[g] = 1.0
    return SignedMeasure(G, weights)


def uniform(G: FiniteGroup) -> SignedMeasure:
    return SignedMeasure(G, np.full(G.order, 1.0 / G.order))


def uniform_on(G: FiniteGroup, elements: Sequence[int] | Subgroup) -> SignedMeasure:
    """Uniform probability on an element set (a subgroup, a coset, a support)."""

    members = list(elements.elements if isinstance(elements, Subgroup) else elements)
    weights = np.zeros(G.order)
    weights[members] = 1.0 / len(members)
    return SignedMeasure(G, weights)


def probability(G: FiniteGroup, weights: Sequence[float] | np.ndarray) -> SignedMeasure:
    """Validate and clamp a probability vector.

    Input contract:
    - Entries at or above `-clamp` tolerance; total mass within the measure
      tolerance of 1.

    Output contract:
    - Returns a measure with round-off negatives clamped to 0.

    Side effects:
    - None.
    """

    tolerances = get_settings().tolerances
    raw = np.asarray(weights, dtype=np.float64)
    if raw.shape != (G.order,):
        raise PreconditionViolated(f"expected {G.order} weights, got shape {raw.shape}")
    problems = probability_violations(raw, tolerances.clamp, tolerances.measure)
    if problems:
        raise PreconditionViolated(problems[0])
    return SignedMeasure(G, np.clip(raw, 0.0, None))


def from_mapping(G: FiniteGroup, masses: Mapping[int | str, float]) -> SignedMeasure:
    """Build a probability measure from `{element or label: mass}`."""

    weights = np.zeros(G.order)
    for key, mass in masses.items():
        index = G.index_of(key) if isinstance(key, str) else int(key)
        weights[index] += float(mass)
    return probability(G, weights)


def random_probability(
    G: FiniteGroup,
    rng: np.random.Generator,
    support: Sequence[int] | None = None,
) -> SignedMeasure:
    """Draw a Dirichlet(1) probability vector on `support` (default all of G)."""

    members = list(range(G.order)) if support is None else list(support)
    weights = np.zeros(G.order)
    weights[members] = rng.dirichlet(np.ones(len(members)))
    return probability(G, weights)


def convolve(mu: SignedMeasure, nu: SignedMeasure) -> SignedMeasure:
    """Return `(mu * nu)(g) = sum_h mu(h) nu(h^-1 g)`.

    Input contract:
    - `mu` and `nu` live on the same group.

    Output contract:
    - Exact formula in `O(|G|^2)` floating-point operations.

    Side effects:
    - None.
    """

    mu._check(nu)
    G = mu.group
    products = np.outer(mu.weights, nu.weights).ravel()
    weights = np.bincount(G.table.ravel(), weights=products, minlength=G.order)
    return SignedMeasure(G, weights)


def convolve_exact(
    mu: Sequence[Fraction], nu: Sequence[Fraction], G: FiniteGroup
) -> list[Fraction]:
    """Rational convolution over element index lists."""

    result = [Fraction(0)] * G.order
    for h, weight_h in enumerate(mu):
        if not weight_h:
            continue
        row = G.table[h]
        for k, weight_k in enumerate(nu):
            if weight_k:
                result[int(row[k])] += weight_h * weight_k
    return result


def pushforward(
    f: Homomorphism | np.ndarray,
    mu: SignedMeasure,
    target: FiniteGroup | None = None,
) -> SignedMeasure:
    """Return `f_* mu(t) = mu(f^-1(t))`.

    Input contract:
    - `f` is a homomorphism from `mu.group`, or a plain element map together
      with its `target` group (coset maps).

    Output contract:
    - Mass-preserving linear image.

    Side effects:
    - None.
    """

    if isinstance(f, Homomorphism):
        if not f.source.same_as(mu.group):
            raise GroupMismatch("pushforward source differs from the measure's group")
        mapping, target = f.mapping, f.target
    else:
        if target is None:
            raise PreconditionViolated("a plain element map needs an explicit target")
        mapping = np.asarray(f, dtype=np.int64)
        if mapping.shape != (mu.group.order,):
            raise GroupMismatch("element map does not cover the measure's group")
    weights = np.bincount(mapping, weights=mu.weights, minlength=target.order)
    return SignedMeasure(target, weights)


def coset_masses(mu: SignedMeasure, H: Subgroup) -> np.ndarray:
    """Masses `mu(gH)` of the left cosets in `left_cosets` order."""

    index = coset_index(mu.group, H)
    return np.bincount(index, weights=mu.weights, minlength=mu.group.order // H.order)


def l2_norm(mu: SignedMeasure) -> float:
    return float(np.linalg.norm(mu.weights))


def l2_distance(mu: SignedMeasure, nu: SignedMeasure) -> float:
    return l2_norm(mu - nu)


def project_coset_uniform(mu: SignedMeasure, H: Subgroup) -> SubspaceProjection:
    """Project onto measures that are uniform on each left coset of `H`.

    Input contract:
    - `H` is a subgroup of `mu.group`.

    Output contract:
    - `projected(gh) = mu(gH) / |H|` and `residual_norm` is the distance
      from `mu` to that subspace.

    Side effects:
    - None.
    """

    if not H.parent.same_as(mu.group):
        raise GroupMismatch("subgroup and measure live on different groups")
    index = coset_index(mu.group, H)
    masses = np.bincount(index, weights=mu.weights)
    projected = SignedMeasure(mu.group, masses[index] / H.order)
    return SubspaceProjection(
        subgroup=H,
        projected=projected,
        residual_norm=l2_distance(mu, projected),
    )


def in_coset_uniform_subspace(
    mu: SignedMeasure, H: Subgroup, tolerance: float | None = None
) -> bool:
    atol = get_settings().tolerances.measure if tolerance is None else tolerance
    return project_coset_uniform(mu, H).residual_norm <= atol


def l2_decomposition_check(mu: SignedMeasure, H: Subgroup) -> tuple[float, float]:
    """Split `||mu - pi||^2` into its quotient and coset-residual parts.

    Input contract:
    - `mu` is a probability measure on the parent of `H`.

    Output contract:
    - Returns `(quotient_part, residual_part)` where
      `quotient_part = ||coset masses of mu - coset masses of pi||^2 / |H|`
      and `residual_part = d(mu, M_H)^2`.

    Side effects:
    - None.
    """

    projection = project_coset_uniform(mu, H)
    # ||projected - pi||^2 equals the coset-mass distance scaled by 1/|H|.
    quotient_part = l2_distance(projection.projected, uniform(mu.group)) ** 2
    residual = l2_norm(mu - projection.projected)
    return quotient_part, residual**2


def product_measure(mu: SignedMeasure, nu: SignedMeasure) -> SignedMeasure:
    """Law of an independent pair, on `direct_product(mu.group, nu.group)`."""

    G = direct_product(mu.group, nu.group)
    return SignedMeasure(G, np.outer(mu.weights, nu.weights).ravel())


def is_probability(mu: SignedMeasure) -> bool:
    tolerances = get_settings().tolerances
    return not probability_violations(mu.weights, tolerances.clamp, tolerances.measure)
