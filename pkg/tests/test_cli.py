"""End-to-end CLI behavior: runs, artifacts, exit codes, replay checks."""

import json
import sys

import pytest

from ergolab.cli import main

GROWTH = ["run", "cat_bowen_growth", "--override", "schedule=10"]


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "cat_bowen_growth" in out
    assert "characterize" in out


def test_describe_prose(capsys):
    assert main(["describe", "cat_entropy_bound"]) == 0
    out = capsys.readouterr().out
    assert "cat_entropy_bound" in out
    assert "bound" in out


def test_describe_toml_round_trip(tmp_path, capsys):
    assert main(["describe", "cat_bowen_growth", "--toml"]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "again.toml"
    path.write_text(text)
    assert main(["describe", str(path)]) == 0


def test_run_growth_writes_artifacts(tmp_path, capsys):
    code = main(GROWTH + ["--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS]" in out
    assert "wrote" in out
    csvs = list(tmp_path.glob("*.csv"))
    jsons = list(tmp_path.glob("*.json"))
    gps = list(tmp_path.glob("*.gp"))
    assert len(csvs) == 1 and len(jsons) == 1 and len(gps) == 1
    header = csvs[0].read_text().splitlines()[0]
    assert header.startswith("q,")
    record = json.loads(jsons[0].read_text())
    assert record["kind"] == "growth"
    assert record["seed"] == 0
    assert str(csvs[0].name) in gps[0].read_text()


def test_run_same_seed_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(GROWTH + ["--out", str(a), "--seed", "5"]) == 0
    assert main(GROWTH + ["--out", str(b), "--seed", "5"]) == 0
    csv_a = next(a.glob("*.csv")).read_bytes()
    csv_b = next(b.glob("*.csv")).read_bytes()
    assert csv_a == csv_b


def test_run_unknown_scenario_exits_2(tmp_path, capsys):
    assert main(["run", "nope", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_run_malformed_override_exits_2(tmp_path, capsys):
    code = main(["run", "cat_bowen_growth", "--override", "oops",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "KEY=VALUE" in capsys.readouterr().err


def test_run_undersampled_warns_and_strict_fails(tmp_path, capsys):
    args = ["run", "cat_characterize", "--out", str(tmp_path),
            "--override", "orbit_len=60", "--override", "n_orbits=8",
            "--override", "benettin_steps=300", "--override",
            "exponent_sample=8", "--override", "settle=0"]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert "[warn]" in out
    assert main(args + ["--strict"]) == 1


def test_verify_replay_pass_and_tamper(tmp_path, capsys):
    assert main(GROWTH + ["--out", str(tmp_path)]) == 0
    capsys.readouterr()
    path = next(tmp_path.glob("*.json"))
    assert main(["verify-replay", str(path)]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out

    record = json.loads(path.read_text())
    record["rows"][0]["measured"] = 99.0
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(record))
    assert main(["verify-replay", str(tampered)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_replay_unreadable_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify-replay", str(bad)]) == 2
    assert main(["verify-replay", str(tmp_path / "missing.json")]) == 2
