"""Command-line entry point: validate, run, sweep and report verbs."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (EXIT_ERROR, EXIT_INVALID, EXIT_OK, EXIT_OVER_BUDGET,
                      load_scenario, run, validate)


def _add_common(parser) -> None:
    parser.add_argument("--scenario", required=True, help="scenario YAML file")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel channel workers")
    parser.add_argument("--tol-scale", type=float, default=1.0,
                        help="uniform tolerance scale (0.5 = twice as strict)")


def _print_report(payload: dict) -> None:
    print(f"scenario_hash : {payload.get('scenario_hash', '?')}")
    for key in ("lhs", "beta", "N_minus", "N0", "resonance_sum", "rhs",
                "residual", "error_budget", "residual_budget", "flagged"):
        if key in payload:
            print(f"{key:14} : {payload[key]}")
    if payload.get("resonances"):
        print("resonances    :",
              ", ".join(f"(varsigma={s}, m={m})" for s, m in payload["resonances"]))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levscat",
        description="Phase shifts, thresholds and Levinson sum rules for "
                    "inverse-square-tail potentials")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario file without running numerics")
    p_validate.add_argument("--scenario", required=True)

    p_run = sub.add_parser("run", help="execute a scenario task")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a coupling sweep scenario")
    _add_common(p_sweep)

    p_report = sub.add_parser("report", help="pretty-print a stored report")
    p_report.add_argument("--path", required=True, help="levinson.json to display")

    args = parser.parse_args(argv)

    if args.verb == "validate":
        scenario = load_scenario(args.scenario)
        diagnostics = validate(scenario)
        if diagnostics:
            for d in diagnostics:
                print(f"diagnostic: {d}")
            return EXIT_INVALID
        print("scenario ok")
        return EXIT_OK

    if args.verb == "report":
        with open(args.path, "r", encoding="utf-8") as fh:
            _print_report(json.load(fh))
        return EXIT_OK

    scenario = load_scenario(args.scenario)
    if args.verb == "sweep" and scenario.task != "sweep":
        print("sweep verb requires a scenario with task: sweep", file=sys.stderr)
        return EXIT_ERROR
    record = run(scenario, out_dir=args.out, threads=args.threads,
                 tol_scale=args.tol_scale)
    print(f"status: {record.status}")
    for path, digest in record.outputs:
        print(f"  {path}  sha256={digest[:16]}")
    if record.status == "ok":
        return EXIT_OK
    if record.status == "residual-over-budget":
        return EXIT_OVER_BUDGET
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
