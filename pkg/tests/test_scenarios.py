"""Scenario registry, overrides, TOML round trips, and fast runs."""

import numpy as np
import pytest

import ergolab.scenarios as sc

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


def test_registry_names_and_kinds():
    assert len(sc.REGISTRY) >= 10
    for name, scn in sc.REGISTRY.items():
        assert scn.name == name
        assert scn.kind in sc.KIND_COLUMNS
        assert scn.kind in sc.KIND_CHECKS
        assert scn.description


def test_get_scenario_by_name_and_path(tmp_path):
    scn = sc.get_scenario("cat_bowen_growth")
    assert scn.kind == "growth"
    path = tmp_path / "custom.toml"
    path.write_text(scn.to_toml())
    loaded = sc.get_scenario(str(path))
    assert loaded.name == scn.name
    assert loaded.settings == scn.settings
    assert loaded.schedule == scn.schedule
    with pytest.raises(KeyError):
        sc.get_scenario("no_such_scenario")


def test_toml_round_trip_all_registry():
    for scn in sc.REGISTRY.values():
        rec = tomllib.loads(scn.to_toml())["scenario"]
        assert sc.scenario_from_dict(rec) == scn


def test_with_overrides():
    scn = sc.get_scenario("cat_bowen_growth")
    out = scn.with_overrides([("epsilon", "0.002"), ("schedule", "5,10"),
                              ("name", "custom_growth")])
    assert out.settings["epsilon"] == 0.002
    assert tuple(out.schedule) == (5, 10)
    assert out.name == "custom_growth"
    # the original scenario is untouched
    assert scn.settings["epsilon"] != 0.002
    scn2 = sc.get_scenario("cat_map_semicontinuity")
    out2 = scn2.with_overrides([("map.t", "0.5")])
    assert out2.map_params["t"] == 0.5


def test_override_parsing_types():
    assert sc._parse_override("3") == 3
    assert sc._parse_override("3.5") == 3.5
    assert sc._parse_override("true") is True
    assert sc._parse_override("false") is False
    assert sc._parse_override("hello") == "hello"
    assert sc._parse_override("1,2,3") == [1, 2, 3]


def test_run_growth_scenario():
    scn = sc.get_scenario("cat_bowen_growth").with_overrides([("schedule", "10,20")])
    out = sc.run_scenario(scn, seed=0)
    assert out["kind"] == "growth"
    assert out["columns"] == sc.KIND_COLUMNS["growth"]
    assert len(out["rows"]) == 2
    for row in out["rows"]:
        assert row["within_ceiling"]
        assert row["measured"] <= row["ceiling"] + 1e-6
    assert out["verdicts"]["growth_within_ceiling"]["ok"]
    assert out["verdicts"]["ceiling_decreasing"]["ok"]
    assert out["wall_clock_s"] > 0


def test_run_signature_scenario():
    out = sc.run_scenario(sc.get_scenario("cat_x_rotation_signature"), seed=1)
    assert out["kind"] == "signature"
    target = [r for r in out["rows"] if r["is_target"]]
    assert len(target) == 1
    assert abs(target[0]["mass"] - 1.0) < 1e-12
    assert abs(sum(r["mass"] for r in out["rows"]) - 1.0) < 1e-12
    assert all(v["ok"] for v in out["verdicts"].values())
    assert out["replay"]["beta"] == 1.0


def test_run_inverse_signature_scenario():
    out = sc.run_scenario(sc.get_scenario("plastic3_inverse_signature"), seed=0)
    assert out["replay"]["beta"] == 0.0
    labels = {r["label"]: r["mass"] for r in out["rows"]}
    assert abs(labels["two_positive"] - 1.0) < 1e-12
    assert all(v["ok"] for v in out["verdicts"].values())


def test_run_scenario_deterministic_per_seed():
    scn = sc.get_scenario("plastic3_inverse_signature")
    a = sc.run_scenario(scn, seed=0)
    b = sc.run_scenario(scn, seed=0)
    masses = lambda out: [row["mass"] for row in out["rows"]]
    assert masses(a) == masses(b)
    assert a["seed"] == 0
    assert a["scenario"]["name"] == scn.name


def test_schedule_override_changes_growth_qs():
    scn = sc.get_scenario("cat_bowen_growth").with_overrides([("schedule", "8")])
    out = sc.run_scenario(scn, seed=0)
    assert len(out["rows"]) == 1
    assert out["rows"][0]["q"] == 8
