"""Command line entry points.

Subcommands: ``run`` executes a scenario and writes its trace; ``check``
evaluates the seven channel properties over a trace; ``analyze`` emits the
inaccessibility worst-case table as CSV; ``report`` summarizes a trace as
CSV counters. Exit codes: 0 success or all properties pass, 1 property
failure or segment failure, 2 usage or configuration error.
"""

import argparse
import csv
import json
import sys

from . import checks, inaccess, scenario as scenario_mod, trace
from .harness import run_scenario
from .trace import TraceError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _cmd_run(args) -> int:
    sc = scenario_mod.parse_file(args.scenario)
    result = run_scenario(sc, seed=args.seed, until=args.until)
    trace.dump(result.records, args.trace_out)
    if result.failure_diagnosis is not None:
        print(f"segment failure: {result.failure_diagnosis}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {len(result.records)} trace records to {args.trace_out}")
    return EXIT_OK


def _cmd_check(args) -> int:
    sc = scenario_mod.parse_file(args.scenario)
    records = trace.load(args.trace)
    report = checks.check(records, sc)
    payload = {
        "properties": {
            name: {
                "pass": v.passed,
                "counterexamples": list(v.counterexamples),
                "detail": v.detail,
            }
            for name, v in report.verdicts.items()
        },
        "summary": report.summary,
    }
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    for name in checks.PROPERTIES:
        verdict = report.verdicts[name]
        status = "pass" if verdict.passed else "FAIL"
        line = f"{name}: {status}"
        if not verdict.passed:
            line += f"  at indices {list(verdict.counterexamples)}: {verdict.detail}"
        print(line)
    if not report.all_pass():
        print("failed properties: " + ", ".join(report.failed()), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _parse_bo_range(text: str) -> range:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a range like 0..14") from None
    if not 0 <= lo <= hi <= 14:
        raise argparse.ArgumentTypeError("beacon order must stay within 0..14")
    return range(lo, hi + 1)


def _cmd_analyze(args) -> int:
    rows = []
    for scen in inaccess.InaScenario:
        for bo in args.bo_range:
            params = inaccess.MacParams(beacon_order=bo, superframe_order=min(args.so, bo))
            unmit = inaccess.worst_case(scen, params, mitigated=False)
            mit = inaccess.worst_case(scen, params, mitigated=True)
            rows.append({
                "scenario": scen.value,
                "BO": bo,
                "SO": min(args.so, bo),
                "unmitigated_symbols": unmit,
                "mitigated_symbols": mit,
                "ratio": round(mit / unmit, 6),
            })
    _write_csv(args.csv, rows,
               ["scenario", "BO", "SO", "unmitigated_symbols", "mitigated_symbols", "ratio"])
    bad = [r for r in rows if not r["mitigated_symbols"] < r["unmitigated_symbols"]]
    if bad:
        print(f"{len(bad)} rows where mitigation does not reduce the duration",
              file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {len(rows)} rows to {args.csv}")
    return EXIT_OK


def _cmd_report(args) -> int:
    records = trace.load(args.trace)
    counters: dict[str, int] = {}
    for rec in records:
        counters[rec.event] = counters.get(rec.event, 0) + 1
    horizon = records[-1].time if records else 0
    rows = [{"metric": "records", "value": len(records)},
            {"metric": "last_time", "value": horizon}]
    rows.extend({"metric": event, "value": counters.get(event, 0)}
                for event in trace.EVENTS)
    _write_csv(args.csv, rows, ["metric", "value"])
    print(f"wrote {len(rows)} rows to {args.csv}")
    return EXIT_OK


def _write_csv(path, rows, fieldnames) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wnslab",
        description="one-hop wireless segment lab: run, check, analyze, report")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write its trace")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.add_argument("--trace-out", required=True)
    p_run.add_argument("--until", type=int, default=None,
                       help="override the scenario horizon")
    p_run.set_defaults(fn=_cmd_run)

    p_check = sub.add_parser("check", help="check the channel properties over a trace")
    p_check.add_argument("--trace", required=True)
    p_check.add_argument("--scenario", required=True)
    p_check.add_argument("--report", default=None, help="write a JSON report here")
    p_check.set_defaults(fn=_cmd_check)

    p_an = sub.add_parser("analyze", help="inaccessibility worst-case table as CSV")
    p_an.add_argument("--bo-range", type=_parse_bo_range, default=range(0, 15))
    p_an.add_argument("--so", type=int, default=0)
    p_an.add_argument("--csv", required=True)
    p_an.set_defaults(fn=_cmd_analyze)

    p_rep = sub.add_parser("report", help="summary counters for a trace as CSV")
    p_rep.add_argument("--trace", required=True)
    p_rep.add_argument("--csv", required=True)
    p_rep.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (scenario_mod.ScenarioError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
