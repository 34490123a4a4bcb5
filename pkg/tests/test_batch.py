from __future__ import annotations

import pytest

from core.abelian import AbelianGroup
from core.errors import PreconditionViolated
from lab.batch import run_indexed
from lab.models import build_model
from lab.moments import moment_estimate


def _squares(offset: int, start: int, stop: int) -> list[int]:
    return [offset + i * i for i in range(start, stop)]


def test_results_come_back_in_index_order():
    assert run_indexed(_squares, 1, 7, chunk_size=3) == [1 + i * i for i in range(7)]
    assert run_indexed(_squares, 0, 0) == []


def test_worker_pool_matches_serial_run():
    serial = run_indexed(_squares, 5, 40, threads=1, chunk_size=4)
    pooled = run_indexed(_squares, 5, 40, threads=3, chunk_size=4)
    assert pooled == serial


def test_thread_count_must_be_positive():
    with pytest.raises(PreconditionViolated):
        run_indexed(_squares, 0, 5, threads=0)


@pytest.mark.slow
def test_moment_estimate_is_independent_of_threads():
    model = build_model({"family": "iid", "values": [0, 1], "probs": [0.6, 0.4]}, 8, 8)
    G = AbelianGroup.from_cyclic([2])
    serial = moment_estimate(model, G, 0, 600, seed=7, threads=1)
    pooled = moment_estimate(model, G, 0, 600, seed=7, threads=2)
    assert pooled.exact_mean == serial.exact_mean
    assert pooled.stderr == serial.stderr
