"""Command line interface.

Verbs: run a scenario (writing CSV, JSON record, and gnuplot script),
list the built-in scenarios, describe one, and re-verify a serialized
run record offline.  Exit status of run is 0 exactly when every verdict
passed; estimator failures (undersampled entropy, dropped starts) are
downgraded to warnings unless --strict is given.
"""

from __future__ import annotations

import argparse
import sys

from . import report
from .scenarios import KIND_CHECKS, REGISTRY, get_scenario, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ergolab",
        description="numerical experiments for smooth dynamics: exponent "
                    "sums, block entropies, curve-growth certificates, and "
                    "perturbation families")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="run a scenario and write CSV, JSON record, and gnuplot script")
    run_p.add_argument("scenario",
                       help="built-in scenario name or path to a scenario .toml")
    run_p.add_argument("--out", default="runs",
                       help="output directory (default: runs)")
    run_p.add_argument("--seed", type=int, default=0,
                       help="single 64-bit master seed; per-row streams are "
                            "spawned from it deterministically")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent rows (results "
                            "are identical to a single-threaded run)")
    run_p.add_argument("--strict", action="store_true",
                       help="fail the run when an estimator warning was "
                            "downgraded")
    run_p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a setting, a map parameter (map.*), or "
                            "the schedule; repeatable")

    sub.add_parser("list-scenarios", help="list the built-in scenarios")

    d = sub.add_parser("describe",
                       help="print a scenario's recipe and the checks it runs")
    d.add_argument("scenario")
    d.add_argument("--toml", action="store_true",
                   help="emit the scenario as TOML instead of prose")

    v = sub.add_parser(
        "verify-replay",
        help="re-check the inequalities and certificates stored in a run "
             "record, without recomputing any dynamics")
    v.add_argument("record", help="path to a .json record written by run")
    return p


def _cmd_run(args) -> int:
    try:
        scn = get_scenario(args.scenario)
    except (KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    pairs = []
    for item in args.override:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"error: override {item!r} is not KEY=VALUE", file=sys.stderr)
            return 2
        pairs.append((key.strip(), value))
    scn = scn.with_overrides(pairs)
    result = run_scenario(scn, seed=args.seed, workers=args.threads)
    paths = report.write_run(result, args.out)

    for name, verdict in result["verdicts"].items():
        tag = "PASS" if verdict["ok"] else "FAIL"
        print(f"[{tag}] {name}: {verdict['statement']} "
              f"(margin {verdict['margin']:.3g})")
    for message in result["warnings"]:
        print(f"[warn] {message}")
    print(f"rows: {len(result['rows'])}  "
          f"wall clock: {result['wall_clock_s']:.2f}s")
    for kind in ("csv", "json", "gnuplot"):
        print(f"wrote {paths[kind]}")

    ok = all(v["ok"] for v in result["verdicts"].values())
    if args.strict and result["warnings"]:
        ok = False
    return 0 if ok else 1


def _cmd_list() -> int:
    width = max(len(name) for name in REGISTRY)
    for name, scn in REGISTRY.items():
        print(f"{name:<{width}}  {scn.kind:<14} {scn.description}")
    return 0


def _cmd_describe(args) -> int:
    try:
        scn = get_scenario(args.scenario)
    except (KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.toml:
        print(scn.to_toml(), end="")
        return 0
    print(f"name:        {scn.name}")
    print(f"kind:        {scn.kind}")
    print(f"description: {scn.description}")
    print(f"map:         {scn.map_family} {scn.map_params or ''}".rstrip())
    if scn.schedule:
        print(f"schedule:    {list(scn.schedule)}")
    if scn.settings:
        print("settings:")
        for key, value in scn.settings.items():
            print(f"  {key} = {value}")
    print("checks:")
    for line in KIND_CHECKS[scn.kind]:
        print(f"  - {line}")
    return 0


def _cmd_verify(args) -> int:
    try:
        ok, lines = report.verify_replay_file(args.record)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot verify {args.record}: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    print("replay:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list-scenarios":
        return _cmd_list()
    if args.command == "describe":
        return _cmd_describe(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
