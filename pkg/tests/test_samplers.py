from __future__ import annotations

import numpy as np
import pytest

from core.errors import CapExceeded, ConfigInvalid, PreconditionViolated
from lab.models import verify_block_balanced
from samplers.iid import IidSampler, constant_iid, entry_epsilon, uniform_iid
from samplers.registry import SAMPLERS, build_sampler
from samplers.row_duplicate import RowDuplicateSampler
from samplers.shared_shift import SharedShiftSampler


def test_entry_epsilon():
    assert entry_epsilon(np.array([0, 1]), np.array([0.6, 0.4]), 2) == pytest.approx(0.4)
    assert entry_epsilon(np.arange(6), np.full(6, 1 / 6), 6) == pytest.approx(0.5)
    assert entry_epsilon(np.array([0, 2]), np.array([0.5, 0.5]), 2) == pytest.approx(0.0)
    assert entry_epsilon(np.array([0]), np.array([1.0]), 1) == 1.0


def test_iid_sampler_validation():
    with pytest.raises(PreconditionViolated):
        IidSampler(values=(0, 1), probs=(0.5, 0.6))
    with pytest.raises(PreconditionViolated):
        IidSampler(values=(0, 1), probs=(1.0,))


def test_sample_shape_and_range(rng):
    blocks = uniform_iid(3).sample(rng, (2, 3), 5)
    assert blocks.shape == (5, 2, 3)
    assert blocks.dtype == np.int64
    assert set(np.unique(blocks)) <= {0, 1, 2}
    assert not constant_iid(0).sample(rng, (4, 4), 3).any()


def test_outcomes_form_a_distribution():
    points, probs = IidSampler(values=(0, 1), probs=(0.6, 0.4)).outcomes((2, 2), cap=4096)
    assert points.shape == (16, 4)
    assert probs.sum() == pytest.approx(1.0)
    with pytest.raises(CapExceeded):
        uniform_iid(3).outcomes((3, 3), cap=100)


def test_shared_shift_block_is_balanced():
    """Two entries sharing one offset over Z/3 still have balancedness 2/3."""

    sampler = SharedShiftSampler(base=uniform_iid(3), shift_range=3)
    report = verify_block_balanced(sampler, (2, 1), 3, 2.0 / 3.0)
    assert report.passed
    assert report.measured_epsilon == pytest.approx(2.0 / 3.0)
    assert report.subgroups_checked == 8


def test_row_duplicate_keeps_noise_balancedness():
    sampler = RowDuplicateSampler(row=uniform_iid(2), noise=IidSampler(values=(0, 1), probs=(0.9, 0.1)))
    declared = sampler.declared_epsilon((2, 2), 2)
    assert declared == pytest.approx(0.1)
    assert verify_block_balanced(sampler, (2, 2), 2, declared).passed


def test_unbalanced_law_fails_verification():
    sampler = IidSampler(values=(0, 2), probs=(0.5, 0.5))
    report = verify_block_balanced(sampler, (1, 2), 2, 0.1)
    assert not report.passed
    assert report.measured_epsilon == pytest.approx(0.0)


def test_monte_carlo_verification(rng):
    report = verify_block_balanced(uniform_iid(2), (2, 2), 2, 0.4, mode="monte-carlo", rng=rng)
    assert report.mode == "monte-carlo"
    assert report.passed
    with pytest.raises(PreconditionViolated):
        verify_block_balanced(uniform_iid(2), (1, 1), 2, 0.4, mode="guess")


def test_registry_builds_every_family():
    assert set(SAMPLERS) == {"iid", "shared_shift", "row_duplicate"}
    shifted = build_sampler({"family": "shared_shift", "values": [0, 1], "probs": [0.5, 0.5], "shift_range": 4})
    assert isinstance(shifted, SharedShiftSampler)
    assert shifted.shift_range == 4
    duplicated = build_sampler({"family": "row_duplicate", "row_uniform": 3, "uniform": 3})
    assert isinstance(duplicated, RowDuplicateSampler)
    assert build_sampler({"uniform": 5}).describe()["values"] == [0, 1, 2, 3, 4]


def test_registry_errors():
    with pytest.raises(ConfigInvalid):
        build_sampler({"family": "gaussian"})
    with pytest.raises(ConfigInvalid):
        build_sampler({"family": "iid", "values": [0, 1]})
