from __future__ import annotations

import math

import numpy as np
import pytest
import sympy

from core.errors import DimensionCap, PreconditionViolated
from core.groups import builtin_group, cyclic_group, generated_subgroup
from core.measures import convolve, dirac, from_mapping, random_probability, uniform_on
from core.spectral import (
    convolution_matrix,
    epsilon_balanced,
    epsilon_balanced_coordinates,
    full_operator_second_singular_value,
    random_balanced_probability,
    second_singular_value,
    sigma_bound_abelian,
    sigma_bound_general,
    singular_values,
)


def test_convolution_matrix_applies_convolution(rng):
    G = builtin_group("Q8")
    mu = random_probability(G, rng)
    nu = random_probability(G, rng)
    M = convolution_matrix(mu)
    assert np.allclose(M.apply(nu.weights), convolve(nu, mu).weights)


def test_dirac_operator_is_identity():
    G = builtin_group("D8")
    assert np.array_equal(convolution_matrix(dirac(G)).entries, np.eye(G.order))
    assert second_singular_value(dirac(G)).second_largest == 0.0


def test_singular_values_descending():
    assert np.allclose(singular_values(np.diag([3.0, -4.0])), [4.0, 3.0])


def test_singular_values_cap():
    with pytest.raises(DimensionCap):
        singular_values(np.eye(4), cap=3)
    with pytest.raises(PreconditionViolated):
        singular_values(np.ones((2, 3)))


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.9])
def test_coin_on_z2(p):
    mu = from_mapping(cyclic_group(2), {0: 1.0 - p, 1: p})
    assert second_singular_value(mu).second_largest == pytest.approx(abs(1.0 - 2.0 * p), abs=1e-12)


def test_uniform_on_subgroup_has_zero_second_value():
    G = builtin_group("Z2xD8")
    H = generated_subgroup(G, [G.index_of("(0,r)"), G.index_of("(0,s)")])
    report = second_singular_value(uniform_on(G, H))
    assert report.subgroup_used == H
    assert report.second_largest == pytest.approx(0.0, abs=1e-12)


def test_full_operator_sees_proper_support():
    G = cyclic_group(6)
    mu = from_mapping(G, {0: 0.5, 2: 0.5})
    assert second_singular_value(mu).second_largest < 1.0
    assert full_operator_second_singular_value(mu) == pytest.approx(1.0)


def test_singular_values_match_characteristic_polynomial():
    """Squared singular values are roots of det(x - M^T M) computed exactly."""

    G = cyclic_group(3)
    weights = [sympy.Rational(1, 2), sympy.Rational(1, 3), sympy.Rational(1, 6)]
    mu = from_mapping(G, {g: float(w) for g, w in enumerate(weights)})
    M = sympy.Matrix(3, 3, lambda g, h: weights[(g - h) % 3])
    x = sympy.symbols("x")
    poly = (M.T * M).charpoly(x)
    for sigma in singular_values(convolution_matrix(mu)):
        assert abs(float(poly.eval(sympy.Float(sigma**2, 30)))) < 1e-9


def test_epsilon_balanced_values():
    p = 0.3
    assert epsilon_balanced(from_mapping(cyclic_group(2), {0: 1 - p, 1: p})) == pytest.approx(p)
    assert epsilon_balanced(dirac(builtin_group("1"))) == 1.0
    G = cyclic_group(6)
    assert epsilon_balanced(from_mapping(G, {0: 0.5, 2: 0.5})) == pytest.approx(0.0)


def test_epsilon_balanced_coordinates_uniform():
    points = np.arange(3).reshape(3, 1)
    probs = np.full(3, 1.0 / 3.0)
    assert epsilon_balanced_coordinates(points, probs, [3]) == pytest.approx(2.0 / 3.0)


def test_sigma_bound_constants():
    assert sigma_bound_general(1.0, 2) == pytest.approx(math.exp(-1.0 / 16.0))
    assert sigma_bound_general(1.0, 2) == pytest.approx(0.93941, abs=1e-5)
    assert sigma_bound_abelian(0.5, 2) == pytest.approx(0.88250, abs=1e-5)
    with pytest.raises(PreconditionViolated):
        sigma_bound_general(1.5, 2)


@pytest.mark.parametrize("name", ["Z2xZ2", "Z6", "Z4xZ4"])
def test_random_measures_respect_abelian_bound(rng, name):
    G = builtin_group(name)
    for _ in range(20):
        mu, epsilon = random_balanced_probability(G, rng)
        assert epsilon == pytest.approx(min(1.0, epsilon_balanced(mu)))
        bound = sigma_bound_abelian(epsilon, G.exponent())
        assert bound < 1.0
        assert full_operator_second_singular_value(mu) <= bound + 1e-8


def test_balanced_draws_avoid_cosets_of_maximal_subgroups(rng):
    G = builtin_group("Z2xZ6")
    for _ in range(100):
        mu, epsilon = random_balanced_probability(G, rng)
        assert epsilon > 1e-9
        assert generated_subgroup(G, mu.support()).order == G.order
