from __future__ import annotations

import numpy as np
import pytest

from core.errors import ConfigInvalid, PreconditionViolated
from lab.models import (
    BalancedMatrixModel,
    Partition,
    build_model,
    sample_matrix,
    stream,
    uniform_block_model,
)
from samplers.iid import IidSampler, constant_iid, uniform_iid


def test_partition_constructors():
    P = Partition.contiguous(7, 3)
    assert P.blocks == ((0, 1, 2), (3, 4, 5), (6,))
    assert P.max_block == 3
    assert P.count == 3
    assert Partition.from_sizes([2, 1]).blocks == ((0, 1), (2,))
    assert Partition.singletons(3).max_block == 1


def test_partition_must_cover_once():
    with pytest.raises(PreconditionViolated):
        Partition(3, ((0, 1), (1, 2)))
    with pytest.raises(PreconditionViolated):
        Partition(2, ((0, 1), ()))


def test_partition_restrict():
    P = Partition.contiguous(6, 2)
    assert P.restrict([5, 0, 1]).blocks == ((1, 2), (0,))


def test_zero_model_gives_zero_matrix():
    model = uniform_block_model(3, 4, constant_iid(0))
    assert np.array_equal(sample_matrix(model, stream(0, 0, 0)), np.zeros((3, 4), dtype=np.int64))


def test_streams_are_reproducible():
    model = uniform_block_model(5, 5, uniform_iid(7), block_rows=2, block_cols=3)
    first = sample_matrix(model, stream(11, 2, 3))
    assert np.array_equal(first, sample_matrix(model, stream(11, 2, 3)))
    assert not np.array_equal(first, sample_matrix(model, stream(11, 2, 4)))


def test_entry_mean():
    model = uniform_block_model(10, 10, IidSampler(values=(0, 1), probs=(0.6, 0.4)))
    draws = np.stack([sample_matrix(model, stream(5, 0, i)) for i in range(200)])
    assert draws.mean() == pytest.approx(0.4, abs=0.02)


def test_shared_shift_correlates_within_blocks_only():
    model = build_model(
        {"family": "shared_shift", "values": [0, 1], "probs": [0.5, 0.5], "block": [3, 3]},
        6,
        6,
    )
    draws = np.stack([sample_matrix(model, stream(9, 0, i)).ravel() for i in range(2000)])
    corr = np.corrcoef(draws, rowvar=False)
    # (0, 0) and (0, 1) share a block; (0, 0) and (5, 5) do not
    assert corr[0, 1] > 0.5
    assert abs(corr[0, 35]) < 0.1


def test_modulus_reduces_entries():
    model = build_model({"family": "shared_shift", "uniform": 2, "modulus": 2}, 4, 4)
    matrix = sample_matrix(model, stream(1, 0, 0))
    assert set(np.unique(matrix)) <= {0, 1}


def test_declared_epsilon_and_summary():
    model = build_model({"family": "iid", "values": [0, 1], "probs": [0.7, 0.3], "block": [2, 2]}, 4, 6)
    assert model.h == 2
    assert model.w == 2
    assert model.declared_epsilon(2) == pytest.approx(0.3)
    summary = model.summary(2)
    assert summary["n_cols"] == 6
    assert summary["sampler"]["family"] == "iid"


def test_overrides_and_column_restriction():
    base = uniform_block_model(2, 4, uniform_iid(2), block_rows=1, block_cols=2)
    model = BalancedMatrixModel(
        n_rows=2,
        n_cols=4,
        row_partition=base.row_partition,
        col_partition=base.col_partition,
        sampler=base.sampler,
        overrides={(0, 1): constant_iid(0), (1, 1): constant_iid(0)},
    )
    assert not sample_matrix(model, stream(0, 0, 0))[:, 2:].any()
    restricted = model.restrict_columns([2, 3])
    assert restricted.n_cols == 2
    assert not sample_matrix(restricted, stream(0, 0, 1)).any()


def test_build_model_rejects_bad_block():
    with pytest.raises(ConfigInvalid):
        build_model({"family": "iid", "uniform": 2, "block": [2]}, 4, 4)
