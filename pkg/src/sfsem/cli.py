"""Command-line front end: run a chart against a scenario, check its
print output, or validate a chart file.

Exit codes: 0 success, 1 input error, 2 runtime or budget error (a
partial trace is still written), 3 output mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys

from .dynenv import init_env
from .errors import LoadError, SfsemError
from .interp import DEFAULT_FUEL, Interpreter, Trace
from .scenario_io import (
    check_trace,
    emit_trace,
    load_chart,
    load_scenario,
    scenario_problems,
)

FUEL_ENV_VAR = "SFSEM_FUEL"

OK = 0
INPUT_ERROR = 1
RUNTIME_ERROR = 2
CHECK_MISMATCH = 3


def _read(path: str, what: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise LoadError(f"cannot read {what} {path!r}: {exc.strerror or exc}") from None


def _default_fuel() -> int:
    raw = os.environ.get(FUEL_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
        except ValueError:
            pass
        print(f"ignoring invalid {FUEL_ENV_VAR}={raw!r}", file=sys.stderr)
    return DEFAULT_FUEL


def _pick_fuel(flag_value: int | None, scenario_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    if scenario_value is not None:
        return scenario_value
    return _default_fuel()


def _load_pair(chart_path: str, scenario_path: str):
    chart = load_chart(_read(chart_path, "chart"))
    scenario = load_scenario(_read(scenario_path, "scenario"))
    problems = scenario_problems(scenario, chart)
    if problems:
        raise LoadError(
            f"scenario {scenario_path!r} does not fit chart {chart.name!r}", problems
        )
    return chart, scenario


def _execute(chart, scenario, args) -> tuple[Trace, SfsemError | None]:
    interp = Interpreter(
        chart,
        fuel_per_round=_pick_fuel(args.fuel, scenario.fuel_per_round),
        strict_terminal_junctions=args.strict_terminal_junction,
    )
    env = init_env(chart, scenario.initial_vars)
    try:
        _, trace = interp.run(
            env, scenario.events, snapshot_vars=getattr(args, "snapshot_vars", False)
        )
        error = None
    except SfsemError as exc:
        trace = getattr(exc, "trace", None) or Trace(chart_name=chart.name)
        error = exc
    trace.execution_periods = scenario.execution_periods
    return trace, error


def _write_trace(trace: Trace, out: str | None) -> None:
    payload = emit_trace(trace)
    if out is None or out == "-":
        sys.stdout.write(payload.decode("utf-8"))
    else:
        with open(out, "wb") as fh:
            fh.write(payload)


def cmd_run(args) -> int:
    try:
        chart, scenario = _load_pair(args.chart, args.scenario)
    except LoadError as exc:
        _report_load_error(exc)
        return INPUT_ERROR
    trace, error = _execute(chart, scenario, args)
    _write_trace(trace, args.out)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        return RUNTIME_ERROR
    return OK


def cmd_check(args) -> int:
    try:
        chart, scenario = _load_pair(args.chart, args.scenario)
    except LoadError as exc:
        _report_load_error(exc)
        return INPUT_ERROR
    if scenario.expected_prints is None:
        print("nothing to check: scenario has no expectedPrints", file=sys.stderr)
        return INPUT_ERROR
    trace, error = _execute(chart, scenario, args)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        return RUNTIME_ERROR
    report = check_trace(trace, scenario.expected_prints)
    if report.ok:
        print(f"output matches ({len(scenario.expected_prints)} prints)")
        return OK
    print(report.message, file=sys.stderr)
    return CHECK_MISMATCH


def cmd_validate(args) -> int:
    try:
        load_chart(_read(args.chart, "chart"))
    except LoadError as exc:
        _report_load_error(exc)
        return INPUT_ERROR
    print("chart is valid")
    return OK


def _report_load_error(exc: LoadError) -> None:
    print(f"error: {exc}", file=sys.stderr)
    for diag in exc.diagnostics:
        print(f"  - {diag}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfsem",
        description="Run, check and validate hierarchical state-machine charts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario and emit the trace")
    run.add_argument("chart")
    run.add_argument("scenario")
    run.add_argument("--out", default=None, help="trace file (default: stdout)")
    run.add_argument("--fuel", type=int, default=None, help="per-round step budget")
    run.add_argument(
        "--strict-terminal-junction",
        action="store_true",
        help="keep running a state's during/inner work after a terminal junction",
    )
    run.add_argument(
        "--snapshot-vars",
        action="store_true",
        help="include the full valuation in every trace round",
    )
    run.set_defaults(handler=cmd_run)

    check = sub.add_parser("check", help="run and compare against expectedPrints")
    check.add_argument("chart")
    check.add_argument("scenario")
    check.add_argument("--fuel", type=int, default=None)
    check.add_argument("--strict-terminal-junction", action="store_true")
    check.set_defaults(handler=cmd_check, snapshot_vars=False)

    validate = sub.add_parser("validate", help="check a chart file for problems")
    validate.add_argument("chart")
    validate.set_defaults(handler=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "fuel", None) is not None and args.fuel <= 0:
        print("error: --fuel must be positive", file=sys.stderr)
        return INPUT_ERROR
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
