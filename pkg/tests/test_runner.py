from __future__ import annotations

import pytest

from config.loader import load_experiment_config, validate_experiment_payload
from core.abelian import AbelianGroup
from core.errors import ConfigInvalid
from lab.runner import RUNNERS, RunOptions, parse_abelian, run_experiment

QUIET = RunOptions(debug=False, show_progress=False)


def _run(command: str, parameters: dict, **top) -> list:
    config = validate_experiment_payload({"command": command, "parameters": parameters, "id": "t", **top})
    return run_experiment(config, QUIET)


def _by_name(rows: list) -> dict:
    return {row.statistic_name: row for row in rows}


def test_every_schema_command_has_a_runner():
    assert set(RUNNERS) == {
        "walk-verify",
        "sigma-bound",
        "moment-estimate",
        "class-distribution",
        "depth-census",
        "equidistribution",
    }


@pytest.mark.parametrize(
    "spec, key",
    [([2, 2], "Z/2 x Z/2"), (6, "Z/6"), ("Z2xZ4", "Z/2 x Z/4"), ("1", "1"), ({"invariant_factors": [3]}, "Z/3")],
)
def test_parse_abelian(spec, key):
    assert parse_abelian(spec).key == key


def test_parse_abelian_rejects_garbage():
    with pytest.raises(ConfigInvalid):
        parse_abelian("Q8")


def test_a5_rows():
    rows = _by_name(_run("walk-verify", {"mode": "a5"}))
    assert rows["a5:p_3_to_4:exact"].value == 0.0
    assert rows["a5:uniform_3_to_4"].reference_value == pytest.approx(0.2)
    assert rows["a5:family_not_normal"].passed
    assert all(row.passed for row in rows.values())


def test_dihedral_rows():
    rows = _run("walk-verify", {"mode": "dihedral", "n_values": [4], "p_values": [0.3], "k_values": [1, 2]})
    names = [row.statistic_name for row in rows]
    assert names == [
        "D8:p=0.3:even_sigma",
        "D8:p=0.3:k=1:golden",
        "D8:p=0.3:k=1:strong",
        "D8:p=0.3:k=2:golden",
        "D8:p=0.3:k=2:strong",
    ]
    assert rows[0].value == pytest.approx(0.4, abs=1e-10)
    assert all(row.passed for row in rows)


def test_walk_suite_rows():
    rows = _run("walk-verify", {"mode": "suite", "trials": 6, "groups": ["Z6", "D8", "Q8"]}, seed=1)
    assert len(rows) == 12
    assert rows[0].statistic_name.startswith("instance_0:")
    assert all(row.passed for row in rows)


def test_custom_walk_with_family():
    parameters = {
        "mode": "custom",
        "group": "D8",
        "steps": [{"e": 0.5, "r": 0.5}, {"e": 0.7, "s": 0.3}],
        "family": [["r"], ["s"]],
    }
    rows = _by_name(_run("walk-verify", parameters))
    assert {"D8:strong", "D8:corollary", "D8:level_1:sigma_product", "D8:level_2:sigma_product"} <= set(rows)
    assert rows["D8:strong"].passed
    assert rows["D8:corollary"].passed


def test_custom_walk_with_unknown_label():
    parameters = {"mode": "custom", "group": "D8", "steps": [{"e": 1.0}], "chain": [["x"]]}
    with pytest.raises(ConfigInvalid):
        _run("walk-verify", parameters)


def test_unknown_walk_mode():
    with pytest.raises(ConfigInvalid):
        _run("walk-verify", {"mode": "spiral"})


def test_sigma_bound_rows():
    rows = _run("sigma-bound", {"mode": "general", "trials": 8, "groups": ["D8", "Q8"]}, seed=2)
    assert len(rows) == 9
    assert all(row.rule == "le_bound" and row.passed for row in rows[:-1])
    assert all(row.bound < 1.0 for row in rows[:-1])
    assert rows[-1].statistic_name == "nontrivial_trials"
    assert rows[-1].value == 8.0
    assert rows[-1].passed


@pytest.mark.slow
def test_builtin_sigma_bound_abelian_is_never_vacuous():
    config = load_experiment_config("sigma-bound-abelian")
    rows = _by_name(run_experiment(config, QUIET))
    assert rows["nontrivial_trials"].value == 1000.0
    assert all(row.passed for row in rows.values())


def test_sigma_bound_abelian_rejects_nonabelian_groups():
    with pytest.raises(ConfigInvalid):
        _run("sigma-bound", {"mode": "abelian", "trials": 1, "groups": ["Z6", "D8"]})


def test_moment_rows():
    parameters = {
        "n": 4,
        "samples": 200,
        "cases": [{"group": [2], "u": 0}, {"group": [2], "u": 1}],
        "models": {"bits": {"family": "iid", "uniform": 2}},
    }
    rows = _run("moment-estimate", parameters, seed=4)
    assert [row.statistic_name for row in rows] == ["bits:Z/2:u=0", "bits:Z/2:u=1"]
    assert [row.reference_value for row in rows] == [1.0, 0.5]
    assert all(row.rule == "within_3se" for row in rows)


def test_moment_needs_models():
    with pytest.raises(ConfigInvalid):
        _run("moment-estimate", {"n": 4, "samples": 10, "cases": [{"group": [2]}], "models": {}})


def test_class_distribution_rows():
    parameters = {"n": 5, "u": 0, "a": 2, "samples": 200, "model": {"family": "iid", "uniform": 2}}
    rows = _by_name(_run("class-distribution", parameters, seed=3))
    assert rows["P[1]"].rule == "within_3se"
    assert rows["total_frequency"].passed


def test_depth_census_rows():
    parameters = {"n": 4, "a": 2, "groups": [[2]], "deltas": [0.5]}
    rows = _by_name(_run("depth-census", parameters))
    assert rows["Z/2:maps"].value == 16.0
    assert rows["Z/2:delta=0.5:D=2"].passed


def test_equidistribution_failures_become_rows():
    parameters = {
        "instances": [
            {"group": [2], "a": 2, "f": [[1, 0, 0, 0]], "w": 2, "r": 1, "model": {"family": "iid", "uniform": 2}},
        ],
        "combinations": [[0.5, 0.5]],
    }
    rows = _by_name(_run("equidistribution", parameters))
    assert not rows["instance_0:precondition"].passed
    assert not rows["combination_0:hypothesis"].passed


def test_builtin_equidistribution_passes():
    config = load_experiment_config("equidistribution")
    rows = run_experiment(config, QUIET)
    assert rows
    assert all(row.passed for row in rows)


def test_parse_abelian_round_trip_for_depth_groups():
    assert parse_abelian([2, 2]) == AbelianGroup.from_cyclic([2, 2])
