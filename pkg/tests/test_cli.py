from __future__ import annotations

import pytest
import yaml

from prod.cli import main
from prod.results_store import sidecar_path


def _write_config(path, payload):
    path.write_text(yaml.safe_dump(payload), encoding="utf-8")
    return path


def test_list_action():
    assert main(["list"]) == 0


def test_builtin_run_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "a5.csv"
    assert main(["run", "--config", "a5-counterexample", "--out", str(out)]) == 0
    assert out.exists()
    assert sidecar_path(out).exists()
    assert (tmp_path / "runs.jsonl").exists()


def test_malformed_config_writes_nothing(tmp_path):
    config = _write_config(
        tmp_path / "bad.yaml",
        {"command": "walk-verify", "parameters": {"mode": "a5"}, "colour": "red"},
    )
    out = tmp_path / "bad.csv"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_config_is_an_io_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == 4


def test_cap_exceeded_exit_code(tmp_path):
    config = _write_config(
        tmp_path / "huge.yaml",
        {"command": "depth-census", "parameters": {"n": 30, "a": 2, "groups": [[2]], "deltas": [0.5]}},
    )
    out = tmp_path / "huge.csv"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 3
    assert not out.exists()


def test_failed_rows_exit_code(tmp_path):
    config = _write_config(
        tmp_path / "notcode.yaml",
        {
            "command": "equidistribution",
            "parameters": {
                "instances": [
                    {
                        "group": [2],
                        "a": 2,
                        "f": [[1, 0, 0, 0]],
                        "w": 2,
                        "r": 1,
                        "model": {"family": "iid", "uniform": 2},
                    }
                ]
            },
        },
    )
    out = tmp_path / "notcode.csv"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 1
    assert out.exists()


@pytest.mark.slow
def test_csv_is_identical_across_thread_counts(tmp_path):
    config = _write_config(
        tmp_path / "moments.yaml",
        {
            "command": "moment-estimate",
            "seed": 11,
            "parameters": {
                "n": 4,
                "samples": 300,
                "cases": [{"group": [2], "u": 0}, {"group": [3], "u": 1}],
                "models": {"bits": {"family": "iid", "values": [0, 1], "probs": [0.7, 0.3]}},
            },
        },
    )
    one, two = tmp_path / "one.csv", tmp_path / "two.csv"
    assert main(["run", "--config", str(config), "--threads", "1", "--out", str(one)]) in (0, 1)
    assert main(["run", "--config", str(config), "--threads", "2", "--out", str(two)]) in (0, 1)
    assert one.read_bytes() == two.read_bytes()
