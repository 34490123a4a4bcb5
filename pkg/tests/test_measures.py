from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from core.errors import GroupMismatch, PreconditionViolated
from core.groups import (
    builtin_group,
    cyclic_group,
    dihedral_group,
    generated_subgroup,
    quotient,
    subgroup_lattice,
)
from core.measures import (
    SignedMeasure,
    convolve,
    convolve_exact,
    coset_masses,
    dirac,
    from_mapping,
    in_coset_uniform_subspace,
    is_probability,
    l2_decomposition_check,
    l2_distance,
    l2_norm,
    probability,
    product_measure,
    project_coset_uniform,
    pushforward,
    random_probability,
    uniform,
    uniform_on,
)


def test_convolution_matches_rational_convolution(rng):
    G = builtin_group("D8")
    mu = random_probability(G, rng)
    nu = random_probability(G, rng)
    exact = convolve_exact(
        [Fraction(float(x)) for x in mu.weights],
        [Fraction(float(x)) for x in nu.weights],
        G,
    )
    assert np.allclose(convolve(mu, nu).weights, [float(x) for x in exact], atol=1e-15)


def test_convolution_order_matters_on_nonabelian_group():
    G = dihedral_group(3)
    mu = dirac(G, G.index_of("r"))
    nu = dirac(G, G.index_of("s"))
    left = convolve(mu, nu)
    right = convolve(nu, mu)
    assert G.labels[int(np.argmax(left.weights))] == "r s"
    assert not left.allclose(right)


def test_dirac_identity_is_neutral(rng):
    G = builtin_group("Q8")
    mu = random_probability(G, rng)
    assert convolve(dirac(G), mu).allclose(mu)
    assert convolve(mu, dirac(G)).allclose(mu)


def test_uniform_absorbs(rng):
    G = builtin_group("Z2xD8")
    mu = random_probability(G, rng)
    assert convolve(mu, uniform(G)).allclose(uniform(G))


def test_probability_validation():
    G = cyclic_group(3)
    with pytest.raises(PreconditionViolated):
        probability(G, [0.5, 0.5, 0.5])
    with pytest.raises(PreconditionViolated):
        probability(G, [1.2, -0.2, 0.0])
    clamped = probability(G, [1.0, -1e-14, 1e-14])
    assert clamped.weights.min() >= 0.0
    assert is_probability(clamped)


def test_from_mapping_by_label():
    G = dihedral_group(4)
    mu = from_mapping(G, {"e": 0.25, "r": 0.25, "s": 0.5})
    assert mu.weights[G.index_of("s")] == pytest.approx(0.5)


def test_convolve_rejects_other_group():
    with pytest.raises(GroupMismatch):
        convolve(uniform(cyclic_group(4)), uniform(cyclic_group(5)))


def test_pushforward_to_quotient(rng):
    G = dihedral_group(4)
    rotations = generated_subgroup(G, [G.index_of("r")])
    Q, q = quotient(G, rotations)
    mu = random_probability(G, rng)
    pushed = pushforward(q, mu)
    assert pushed.group.order == 2
    assert np.allclose(pushed.weights, coset_masses(mu, rotations))
    assert pushed.mass == pytest.approx(1.0)


def test_coset_projection_and_decomposition(rng):
    """The distance to uniform splits into a quotient part and a coset residual."""

    G = builtin_group("Z2xD8")
    H = generated_subgroup(G, [G.index_of("(1,r)")])
    mu = random_probability(G, rng)
    projection = project_coset_uniform(mu, H)
    assert np.allclose(coset_masses(projection.projected, H), coset_masses(mu, H))
    quotient_part, residual_part = l2_decomposition_check(mu, H)
    total = float(np.sum((mu.weights - 1.0 / G.order) ** 2))
    assert quotient_part + residual_part == pytest.approx(total, abs=1e-12)


def test_uniform_on_subgroup_is_its_own_projection():
    G = cyclic_group(6)
    H = generated_subgroup(G, [2])
    projection = project_coset_uniform(uniform_on(G, H), H)
    assert projection.residual_norm == pytest.approx(0.0, abs=1e-15)


def test_product_measure_marginals(rng):
    mu = random_probability(cyclic_group(2), rng)
    nu = random_probability(cyclic_group(3), rng)
    joint = product_measure(mu, nu)
    assert joint.group.order == 6
    assert np.allclose(joint.weights.reshape(2, 3).sum(axis=1), mu.weights)
    assert np.allclose(joint.weights.reshape(2, 3).sum(axis=0), nu.weights)


def test_l2_distance_to_uniform():
    G = cyclic_group(4)
    assert l2_distance(dirac(G), uniform(G)) == pytest.approx(np.sqrt(0.75))
    assert l2_distance(uniform(G), uniform(G)) == 0.0
    with pytest.raises(GroupMismatch):
        l2_distance(dirac(G), dirac(cyclic_group(2)))


def test_coset_uniform_membership():
    D8 = dihedral_group(4)
    rotations = generated_subgroup(D8, [D8.index_of("r")])
    assert in_coset_uniform_subspace(uniform_on(D8, rotations), rotations)
    assert in_coset_uniform_subspace(uniform(D8), rotations)
    assert not in_coset_uniform_subspace(dirac(D8, D8.index_of("r")), rotations)


PROPERTY_GROUPS = ["D8", "Q8", "D12", "Z2xD8", "Z2xZ6"]


def _signed(G, rng) -> SignedMeasure:
    return SignedMeasure(G, rng.standard_normal(G.order))


def test_l2_norm():
    G = cyclic_group(4)
    assert l2_norm(dirac(G)) == 1.0
    assert l2_norm(uniform(G)) == pytest.approx(0.5)
    assert l2_norm(SignedMeasure(G, [3.0, -4.0, 0.0, 0.0])) == pytest.approx(5.0)


def test_l2_distance_triangle_inequality(rng):
    G = builtin_group("Q8")
    for _ in range(50):
        a, b, c = _signed(G, rng), _signed(G, rng), _signed(G, rng)
        assert l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12


def test_convolution_by_probability_is_non_expansive(rng):
    for name in PROPERTY_GROUPS:
        G = builtin_group(name)
        for _ in range(200):
            mu = random_probability(G, rng)
            nu = _signed(G, rng)
            assert l2_norm(convolve(nu, mu)) <= l2_norm(nu) + 1e-9


@pytest.mark.parametrize("name", PROPERTY_GROUPS)
def test_normal_subgroup_identities(rng, name):
    """Stability of coset-uniform measures, multiplicativity and the scaled isometry."""

    G = builtin_group(name)
    for H in subgroup_lattice(G).normal_subgroups():
        _, P = quotient(G, H)
        for _ in range(5):
            mu = random_probability(G, rng)
            nu = random_probability(G, rng)
            nu_H = project_coset_uniform(_signed(G, rng), H).projected

            assert in_coset_uniform_subspace(convolve(nu_H, mu), H)

            pushed_product = pushforward(P, convolve(mu, nu))
            product_of_pushed = convolve(pushforward(P, mu), pushforward(P, nu))
            assert np.allclose(pushed_product.weights, product_of_pushed.weights, atol=1e-9)

            scaled = l2_norm(pushforward(P, nu_H)) / np.sqrt(H.order)
            assert l2_norm(nu_H) == pytest.approx(scaled, abs=1e-9)


def test_projection_is_nearest_coset_uniform_measure(rng):
    G = dihedral_group(4)
    H = generated_subgroup(G, [G.index_of("s")])
    mu = random_probability(G, rng)
    residual = project_coset_uniform(mu, H).residual_norm
    for _ in range(100):
        w = project_coset_uniform(_signed(G, rng), H).projected
        assert residual <= l2_distance(mu, w) + 1e-12
