from __future__ import annotations

from fractions import Fraction

import pytest

from core.abelian import AbelianGroup, lambda_u_tensor_mass, trivial
from core.errors import PreconditionViolated
from lab.models import build_model
from lab.moments import (
    class_frequency,
    cokernel_class_distribution,
    mean_and_stderr,
    moment_estimate,
    uniform_entry_moment,
)

Z2 = AbelianGroup.from_cyclic([2])
UNIFORM_BITS = {"family": "iid", "uniform": 2}


def test_mean_and_stderr():
    mean, stderr = mean_and_stderr([1, 2, 3, 4])
    assert mean == Fraction(5, 2)
    assert stderr == pytest.approx((5.0 / 3.0 / 4.0) ** 0.5)
    assert mean_and_stderr([7]) == (Fraction(7), 0.0)
    with pytest.raises(PreconditionViolated):
        mean_and_stderr([])


def test_uniform_entry_moment():
    assert uniform_entry_moment(3, 0, Z2) == Fraction(7, 8)
    assert uniform_entry_moment(3, 1, Z2) == Fraction(7, 16)
    assert uniform_entry_moment(4, 0, trivial()) == Fraction(1)


def test_trivial_group_moment_is_one():
    model = build_model(UNIFORM_BITS, 5, 5)
    estimate = moment_estimate(model, trivial(), 0, 100, seed=0)
    assert estimate.mean == 1.0
    assert estimate.stderr == 0.0
    assert estimate.reference == 1.0


def test_moment_needs_matching_corank():
    model = build_model(UNIFORM_BITS, 4, 4)
    with pytest.raises(PreconditionViolated):
        moment_estimate(model, Z2, 1, 10, seed=0)


def test_monte_carlo_moment_matches_exact_value():
    """For uniform bits the surjection moment is known exactly at every size."""

    model = build_model(UNIFORM_BITS, 4, 4)
    estimate = moment_estimate(model, Z2, 0, 600, seed=42)
    exact = float(uniform_entry_moment(4, 0, Z2))
    assert estimate.samples_used == 600
    assert estimate.reference == 1.0
    assert abs(estimate.mean - exact) <= 4.0 * estimate.stderr
    assert float(estimate.exact_mean) == pytest.approx(estimate.mean)


def test_moment_is_deterministic():
    model = build_model({"family": "iid", "values": [0, 1], "probs": [0.6, 0.4]}, 6, 7)
    first = moment_estimate(model, Z2, 1, 50, seed=3, experiment=2)
    second = moment_estimate(model, Z2, 1, 50, seed=3, experiment=2)
    assert first.exact_mean == second.exact_mean


def test_class_distribution_table():
    model = build_model(UNIFORM_BITS, 6, 6)
    table = cokernel_class_distribution(model, 2, 300, seed=5)
    assert sum(row.count for row in table) == 300
    assert sum(row.frequency for row in table) == pytest.approx(1.0)
    assert [row.group.order for row in table] == sorted(row.group.order for row in table)
    for row in table:
        assert 0.0 < row.reference < 1.0


def test_unobserved_class_is_synthesized():
    row = class_frequency([], AbelianGroup.from_cyclic([2] * 5), 2, 0, 1000)
    assert row.count == 0
    assert row.frequency == 0.0
    assert row.reference == pytest.approx(lambda_u_tensor_mass(2, AbelianGroup.from_cyclic([2] * 5), 0))


def test_class_distribution_rejects_bad_inputs():
    with pytest.raises(PreconditionViolated):
        cokernel_class_distribution(build_model(UNIFORM_BITS, 4, 4), 1, 10, seed=0)
    with pytest.raises(PreconditionViolated):
        cokernel_class_distribution(build_model(UNIFORM_BITS, 4, 3), 2, 10, seed=0)
