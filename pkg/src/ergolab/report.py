"""Run records: CSV, JSON, and gnuplot serialization plus offline
re-verification of the certified inequalities.

The CSV holds only the deterministic numeric columns (same scenario and
seed give byte-identical bytes in single-threaded runs); timings, the
scenario snapshot, verdicts, and the replay payload live in the JSON
sidecar.  verify_replay re-checks every inequality and certificate in a
record by arithmetic on the stored numbers alone; no orbit, exponent, or
entropy computation is repeated.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .reparam import family_from_record, growth_rate

TOOL_VERSION = "0.1.0"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def rows_to_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(row.get(col, float("nan")))
                              for col in columns))
    return "\n".join(lines) + "\n"


_GNUPLOT = {
    "characterize": ('plot csv using 0:10 with points pt 7 ps 2 '
                     'title "Ruelle residual", 0 with lines lt 0 notitle'),
    "semicontinuity": ('set xlabel "t"\n'
                       'plot csv using 1:2:3 with yerrorlines title "entropy rate", '
                       'csv using 1:5 with linespoints title "positive exponent sum"'),
    "signature": ('set style fill solid 0.5\nset boxwidth 0.5\n'
                  'plot csv using 0:2:xtic(1) with boxes title "component mass"'),
    "growth": ('set xlabel "q"\n'
               'plot csv using 1:5 with linespoints title "measured growth", '
               'csv using 1:6 with linespoints title "ceiling"'),
    "discretize": ('set xlabel "L"\nset logscale y\n'
                   'plot csv using 1:4 with linespoints title "weak-* deviation", '
                   'csv using 1:5 with lines title "weak-* bound", '
                   'csv using 1:6 with linespoints title "entropy deviation", '
                   'csv using 1:7 with lines title "entropy bound"'),
    "bound": ('plot csv using 0:5:xtic(1) with points pt 7 ps 2 title "entropy rate", '
              'csv using 0:9 with points pt 5 ps 2 title "upper bound"'),
}


def gnuplot_script(kind: str, csv_name: str, title: str, png_name: str) -> str:
    body = _GNUPLOT[kind].replace("csv", f'"{csv_name}"')
    return ("set datafile separator comma\n"
            "set key autotitle columnhead\n"
            f'set title "{title}"\n'
            "set terminal pngcairo size 900,600\n"
            f'set output "{png_name}"\n'
            + body + "\n")


def write_run(result: dict, out_dir: str, stem: str = None) -> dict:
    """Write <stem>.csv / .json / .gp into out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    stem = stem or result["scenario"]["name"]
    csv_name, json_name, gp_name = (stem + ".csv", stem + ".json", stem + ".gp")
    csv_text = rows_to_csv(result["columns"], result["rows"])
    record = {
        "tool": f"ergolab {TOOL_VERSION}",
        "seed": result["seed"],
        "scenario": result["scenario"],
        "kind": result["kind"],
        "columns": result["columns"],
        "csv": csv_name,
        "rows": _jsonable(result["rows"]),
        "verdicts": _jsonable(result["verdicts"]),
        "warnings": list(result["warnings"]),
        "replay": _jsonable(result["replay"]),
        "wall_clock_s": float(result["wall_clock_s"]),
    }
    paths = {kind: os.path.join(out_dir, name)
             for kind, name in (("csv", csv_name), ("json", json_name),
                                ("gnuplot", gp_name))}
    with open(paths["csv"], "w") as fh:
        fh.write(csv_text)
    with open(paths["json"], "w") as fh:
        json.dump(record, fh, indent=1)
        fh.write("\n")
    with open(paths["gnuplot"], "w") as fh:
        fh.write(gnuplot_script(result["kind"], csv_name,
                                result["scenario"]["name"], stem + ".png"))
    return paths


def _check(lines, ok, message):
    lines.append(("ok   " if ok else "FAIL ") + message)
    return ok


def _verify_characterize(record, lines) -> bool:
    rc = record["replay"].get("ruelle")
    if rc is None:
        return _check(lines, not record["verdicts"],
                      "no Ruelle data and no verdicts (estimator warning run)")
    ok = True
    resid = rc["positive_sum"] - rc["entropy"]
    ok &= _check(lines, abs(resid - rc["residual"]) <= 1e-12,
                 "stored Ruelle residual equals positive_sum - entropy")
    ok &= _check(lines, rc["ok"] == (rc["residual"] >= -rc["slack"]),
                 f"Ruelle flag consistent with residual >= -{rc['slack']:g}")
    row = record["rows"][0]
    ok &= _check(lines, abs(row["ruelle_residual"] - rc["residual"]) <= 1e-12,
                 "row residual matches replay payload")
    return ok


def _verify_semicontinuity(record, lines) -> bool:
    if not record["rows"]:
        return _check(lines, not record["verdicts"],
                      "no rows and no verdicts (undersampled run)")
    v = record["replay"]["verdict_inputs"]
    tol = record["replay"]["tolerances"]
    rows = record["rows"]
    ref = [r for r in rows if r["t"] == 0][0]
    tail = [r for r in rows if 0 < r["t"] <= tol["tail_threshold"]]
    ok = True
    ok &= _check(lines, abs(ref["entropy_rate"] - v["reference_entropy"]) <= 1e-12,
                 "reference entropy equals the t=0 row")
    if tail:
        max_h = max(r["entropy_rate"] for r in tail)
        drift = max(abs(r["lambda_sum_plus"] - v["reference_lambda"]) for r in tail)
        ok &= _check(lines, abs(max_h - v["max_tail_entropy"]) <= 1e-12,
                     "stored max tail entropy matches the rows")
        ok &= _check(lines, record["verdicts"]["entropy_tail"]["ok"]
                     == (max_h <= v["reference_entropy"] + tol["entropy"]),
                     "entropy tail verdict consistent with the rows")
        ok &= _check(lines, record["verdicts"]["exponent_tail"]["ok"]
                     == (drift <= tol["exponent"] + 1e-15),
                     "exponent tail verdict consistent with the rows")
    if "constant_margin" in record["verdicts"]:
        margin = v["semicontinuity_margin"]
        ok &= _check(lines, record["verdicts"]["constant_margin"]["ok"]
                     == (margin >= tol["margin_floor"]),
                     "constant-family margin verdict consistent")
    return ok


def _verify_signature(record, lines) -> bool:
    rp = record["replay"]
    ok = True
    ok &= _check(lines, abs(rp["beta"] + rp["gamma"] - 1.0) <= 1e-12,
                 "beta + gamma = 1")
    ok &= _check(lines, abs(sum(rp["masses"].values()) - 1.0) <= 1e-12,
                 "component masses sum to 1")
    ok &= _check(lines,
                 record["verdicts"]["recombination"]["ok"]
                 == (rp["weak_star_recombined"] <= 1e-12),
                 "recombination verdict consistent with the stored distance")
    ok &= _check(lines,
                 record["verdicts"]["beta_binary"]["ok"]
                 == (min(rp["beta"], 1 - rp["beta"]) <= 1e-9),
                 "binary-mass verdict consistent with beta")
    return ok


def _verify_growth(record, lines) -> bool:
    ok = True
    for row, rec in zip(record["rows"], record["replay"]["records"]):
        fam = family_from_record(rec["family"])  # validates thetas and size
        ok &= _check(lines,
                     len(fam.thetas) <= fam.bound + 1e-9,
                     f"q={row['q']}: family size {len(fam.thetas)} within "
                     f"cardinality bound {fam.bound:.6g}")
        counts = [(0, 1)] + [(lv["start"] + lv["block"], lv["kept"])
                             for lv in rec["levels"]]
        rep = growth_rate(counts, q=rec["q"], rho=rec["rho"],
                          upsilon=rec["upsilon"],
                          c_ralpha=rec["family"]["constants"]["c_ralpha"])
        ok &= _check(lines, abs(rep.measured - row["measured"]) <= 1e-9,
                     f"q={row['q']}: measured growth recomputed from counts")
        ceiling = rep.ceiling + rec["dchi_max"] / (rec["rho"] * rec["q"])
        ok &= _check(lines, abs(ceiling - row["ceiling"]) <= 1e-9
                     or abs(rep.ceiling - row["ceiling"]) <= 1e-9,
                     f"q={row['q']}: ceiling recomputed from the record")
        ok &= _check(lines, row["within_ceiling"]
                     == (row["measured"] <= row["ceiling"] + 1e-6),
                     f"q={row['q']}: within_ceiling flag consistent")
    ceilings = [row["ceiling"] for row in record["rows"]]
    decreasing = all(a > b for a, b in zip(ceilings, ceilings[1:]))
    ok &= _check(lines, record["verdicts"]["ceiling_decreasing"]["ok"] == decreasing,
                 "ceiling monotonicity verdict consistent")
    return ok


def _verify_discretize(record, lines) -> bool:
    ok = True
    for entry in record["replay"]["levels"]:
        level = entry["level"]
        for name, part in entry["checks"].items():
            ok &= _check(lines, part["ok"] == (part["value"] <= part["bound"]),
                         f"L={level}: {name} deviation {part['value']:.3g} vs "
                         f"bound {part['bound']:.3g}")
        verdict = record["verdicts"][f"bounds_L{level}"]
        all_ok = all(part["ok"] for part in entry["checks"].values())
        ok &= _check(lines, verdict["ok"] == all_ok,
                     f"L={level}: verdict matches the stored checks")
    return ok


def _verify_bound(record, lines) -> bool:
    ok = True
    reports = record["replay"]["reports"]
    for rep in reports:
        total = (rep["partition_entropy"]
                 + rep["regularity_factor"] * (rep["bracket"] + rep["inv_q"])
                 + rep["constant_term"])
        ok &= _check(lines, abs(total - rep["total"]) <= 1e-9,
                     f"{rep['direction']}: bound total equals the sum of its parts")
        ok &= _check(lines, rep["bound_holds"] == (rep["lhs"] <= rep["total"] + 1e-9),
                     f"{rep['direction']}: bound flag consistent with lhs <= total")
        ok &= _check(lines, abs(rep["margin"] - (rep["total"] - rep["lhs"])) <= 1e-9,
                     f"{rep['direction']}: stored margin equals total - lhs")
        ok &= _check(lines, rep["partition_diameter"] < rep["epsilon_cap"],
                     f"{rep['direction']}: partition diameter below the scale cap")
    gap = abs(reports[0]["bracket"] - reports[1]["bracket"])
    ok &= _check(lines, record["verdicts"]["brackets_agree"]["ok"]
                 == (gap <= record["replay"]["agree_tol"]),
                 "bracket agreement verdict consistent")
    return ok


_VERIFIERS = {
    "characterize": _verify_characterize,
    "semicontinuity": _verify_semicontinuity,
    "signature": _verify_signature,
    "growth": _verify_growth,
    "discretize": _verify_discretize,
    "bound": _verify_bound,
}


def verify_replay(record: dict):
    """Re-check all certificates and inequalities stored in a run record.

    Pure arithmetic on the record: no dynamics are recomputed.  Returns
    (ok, report lines)."""
    lines = []
    kind = record.get("kind")
    if kind not in _VERIFIERS:
        return False, [f"FAIL unknown record kind {kind!r}"]
    try:
        ok = _VERIFIERS[kind](record, lines)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        # a record that parses but breaks its own invariants is a FAIL,
        # not an unreadable file
        lines.append(f"FAIL record invariant violated: {exc}")
        return False, lines
    for name, verdict in record.get("verdicts", {}).items():
        ok &= _check(lines, verdict["ok"] or verdict["margin"] < 0,
                     f"verdict {name}: ok flag agrees with a negative margin"
                     if not verdict["ok"] else
                     f"verdict {name}: {verdict['statement']} "
                     f"(margin {verdict['margin']:.3g})")
    return bool(ok), lines


def verify_replay_file(path: str):
    with open(path) as fh:
        record = json.load(fh)
    return verify_replay(record)
