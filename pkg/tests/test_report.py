"""CSV formatting, run artifacts, and record replay verification."""

import json

import numpy as np

import ergolab.report as report
import ergolab.scenarios as sc


def test_cell_formatting():
    assert report._cell(True) == "1"
    assert report._cell(False) == "0"
    assert report._cell(np.bool_(True)) == "1"
    assert report._cell(7) == "7"
    assert report._cell(np.int64(7)) == "7"
    assert report._cell(0.1) == "0.1"
    assert report._cell(float("nan")) == "nan"
    assert report._cell(1.0 / 3.0) == "0.333333333333"
    assert report._cell("label") == "label"


def test_rows_to_csv_missing_column_is_nan():
    text = report.rows_to_csv(["a", "b"], [{"a": 1}, {"a": 2, "b": True}])
    lines = text.splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "1,nan"
    assert lines[2] == "2,1"


def test_gnuplot_script_mentions_files():
    script = report.gnuplot_script("growth", "run.csv", "title", "run.png")
    assert '"run.csv"' in script
    assert '"run.png"' in script
    assert "pngcairo" in script


def test_write_run_and_replay_round_trip(tmp_path):
    scn = sc.get_scenario("cat_bowen_growth").with_overrides(
        [("schedule", "10")])
    result = sc.run_scenario(scn, seed=2)
    paths = report.write_run(result, str(tmp_path))
    record = json.loads(open(paths["json"]).read())
    assert record["tool"].startswith("ergolab ")
    assert record["csv"] == "cat_bowen_growth.csv"
    ok, lines = report.verify_replay(record)
    assert ok
    assert all(line.startswith("ok") for line in lines)
    ok2, _ = report.verify_replay_file(paths["json"])
    assert ok2


def test_verify_replay_rejects_unknown_kind():
    ok, lines = report.verify_replay({"kind": "mystery"})
    assert not ok
    assert "unknown" in lines[0]


def test_verify_replay_catches_inconsistent_verdict(tmp_path):
    scn = sc.get_scenario("plastic3_inverse_signature")
    result = sc.run_scenario(scn, seed=0)
    paths = report.write_run(result, str(tmp_path))
    record = json.loads(open(paths["json"]).read())
    ok, _ = report.verify_replay(record)
    assert ok
    # flip one ok flag without touching its margin
    name = next(iter(record["verdicts"]))
    record["verdicts"][name]["ok"] = False
    ok_bad, lines = report.verify_replay(record)
    assert not ok_bad
    assert any(line.startswith("FAIL") for line in lines)


def test_verify_replay_catches_bad_family_bound(tmp_path):
    scn = sc.get_scenario("cat_bowen_growth").with_overrides(
        [("schedule", "10")])
    result = sc.run_scenario(scn, seed=0)
    paths = report.write_run(result, str(tmp_path))
    record = json.loads(open(paths["json"]).read())
    fam = record["replay"]["records"][0]["family"]
    fam["bound"] = len(fam["thetas"]) - 1
    ok, lines = report.verify_replay(record)
    assert not ok
