from __future__ import annotations

import itertools

import numpy as np
import pytest

from core.abelian import (
    AbelianGroup,
    PartitionType,
    abelian_groups_of_order,
    aut_order,
    groups_of_exponent_dividing,
    hom_count,
    lambda_p_mass,
    lambda_u_finite_mass,
    lambda_u_tensor_mass,
    p_group_partitions,
    sur_count,
    tensor_mod,
    trivial,
)
from core.errors import BInfinite, ExponentMismatch, PreconditionViolated
from core.groups import generated_subgroup


def _brute_force_counts(A: AbelianGroup, B: AbelianGroup) -> tuple[int, int]:
    """Count homomorphisms and surjections by choosing generator images."""

    target = B.realize()
    orders = target.element_orders()
    choices = [np.flatnonzero(d % orders == 0).tolist() for d in A.invariant_factors]
    homs = surjections = 0
    for images in itertools.product(*choices):
        homs += 1
        if generated_subgroup(target, images).order == target.order:
            surjections += 1
    return homs, surjections


def Z(*orders: int) -> AbelianGroup:
    return AbelianGroup.from_cyclic(list(orders))


def test_canonical_form():
    assert Z(2, 3).invariant_factors == (6,)
    assert Z(4, 2).invariant_factors == (2, 4)
    assert Z(2, 2).key == "Z/2 x Z/2"
    assert Z(0, 5).key == "Z x Z/5"
    assert trivial().key == "1"
    assert Z(2, 4) == Z(4, 2)


def test_tensor_mod():
    assert tensor_mod(Z(0, 4), 2) == Z(2, 2)
    assert tensor_mod(Z(9), 6) == Z(3)
    assert tensor_mod(Z(5), 2) == trivial()


@pytest.mark.parametrize(
    "A, B",
    [
        (Z(2, 2, 2), Z(2)),
        (Z(4), Z(2)),
        (Z(2, 4), Z(2, 2)),
        (Z(4, 4), Z(2, 4)),
        (Z(3, 6), Z(3, 3)),
        (Z(2, 3), Z(6)),
    ],
)
def test_counts_match_brute_force(A, B):
    homs, surjections = _brute_force_counts(A, B)
    assert hom_count(A, B) == homs
    assert sur_count(A, B) == surjections


SMALL_GROUPS = [G for n in range(1, 17) for G in abelian_groups_of_order(n)]


@pytest.mark.slow
@pytest.mark.parametrize("B", SMALL_GROUPS, ids=lambda G: G.key)
@pytest.mark.parametrize("A", SMALL_GROUPS, ids=lambda G: G.key)
def test_counts_match_brute_force_for_all_small_pairs(A, B):
    homs, surjections = _brute_force_counts(A, B)
    assert hom_count(A, B) == homs
    assert sur_count(A, B) == surjections


def test_counts_with_free_rank():
    assert hom_count(Z(0), Z(5)) == 5
    assert sur_count(Z(0, 0), Z(2, 2)) == 6
    with pytest.raises(BInfinite):
        hom_count(Z(2), Z(0))


@pytest.mark.parametrize(
    "B, expected",
    [(Z(5), 4), (Z(2, 2), 6), (Z(2, 4), 8), (Z(6), 2), (Z(2, 2, 2), 168), (Z(4, 4), 96)],
)
def test_automorphism_orders(B, expected):
    assert aut_order(B) == expected


def test_group_enumeration():
    assert len(list(p_group_partitions(4))) == 5
    assert {G.key for G in abelian_groups_of_order(8)} == {"Z/8", "Z/2 x Z/4", "Z/2 x Z/2 x Z/2"}
    assert len(abelian_groups_of_order(36)) == 4
    assert abelian_groups_of_order(1) == [trivial()]
    assert len(SMALL_GROUPS) == 25
    ranks = groups_of_exponent_dividing(2, max_rank=3)
    assert sorted(G.order for G in ranks) == [1, 2, 4, 8]


def test_trivial_class_masses():
    assert lambda_u_tensor_mass(2, trivial(), 0) == pytest.approx(0.28879, abs=1e-5)
    assert lambda_u_tensor_mass(2, trivial(), 1) == pytest.approx(0.57758, abs=1e-5)
    assert lambda_u_finite_mass(trivial(), 1) == pytest.approx(0.435757, abs=1e-6)


@pytest.mark.parametrize("u", [0, 1])
def test_tensor_masses_sum_to_one(u):
    """Classes of coker (x) Z/2 are the 2-ranks; their masses form a distribution."""

    total = sum(lambda_u_tensor_mass(2, H, u) for H in groups_of_exponent_dividing(2, max_rank=4))
    assert total == pytest.approx(1.0, abs=1e-6)


def test_tensor_mass_over_composite_modulus():
    mass = lambda_u_tensor_mass(6, trivial(), 0)
    assert mass == pytest.approx(
        lambda_u_tensor_mass(2, trivial(), 0) * lambda_u_tensor_mass(3, trivial(), 0), rel=1e-9
    )


def test_tensor_mass_needs_exponent_dividing_modulus():
    with pytest.raises(ExponentMismatch):
        lambda_u_tensor_mass(2, Z(4), 0)


def test_lambda_p_mass():
    assert lambda_p_mass(PartitionType(2, ()), 0) == pytest.approx(0.288788, abs=1e-6)
    assert lambda_p_mass(PartitionType(2, (1,)), 0) == pytest.approx(0.288788, abs=1e-6)
    assert lambda_p_mass(PartitionType(3, (1,)), 1) == pytest.approx(0.140031, rel=1e-4)
    with pytest.raises(PreconditionViolated):
        PartitionType(2, (1, 2))
    with pytest.raises(PreconditionViolated):
        lambda_p_mass(PartitionType(2, ()), -1)
