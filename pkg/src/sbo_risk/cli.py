"""Command-line entry point: ``sbo-risk <subcommand> [options]``."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import catalog
from .analytic import SECONDS_PER_DAY, analyze, calibrated_guess_rate, crack_time
from .scenario_io import emit_report, parse_scenario, with_mode
from .simulator import DEFAULT_TRIALS, run_trials, simulate_epochs, simulate_fleet
from .threat_model import CompositionMode, InvalidParameter, SecretMode, ValidationError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", type=Path, help="write the report here instead of stdout")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument(
        "--scenario", required=True, help="scenario JSON file, or a bundled name such as paper-8-1"
    )
    scenario.add_argument("--mode", choices=[m.value for m in CompositionMode], help="override composition mode")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    sampling.add_argument("--seed", type=_seed, default=0)
    sampling.add_argument("--workers", type=_positive_int, default=1, help="worker processes (results do not change)")

    parser = argparse.ArgumentParser(prog="sbo-risk", description="Security-by-obscurity risk modeling")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common, scenario], help="closed-form residual threat, timing and ALE")

    p = sub.add_parser("simulate", parents=[common, scenario, sampling], help="Monte Carlo first-compromise trials")
    p.add_argument("--horizon", type=float, default=math.inf, help="hours for the compromise probability")

    p = sub.add_parser("fleet", parents=[common, scenario, sampling], help="shared vs per-instance secrets")
    p.add_argument("--secret-mode", choices=[m.value for m in SecretMode], help="override the scenario's fleet mode")

    p = sub.add_parser("epochs", parents=[common, scenario, sampling], help="periodic regeneration over a horizon")
    p.add_argument("--horizon", type=float, required=True, help="hours to simulate")
    p.add_argument("--reset-fraction", type=float, default=1.0, help="attacker progress lost per epoch, in [0, 1]")

    sub.add_parser("catalog", parents=[common], help="dump built-in measures")

    p = sub.add_parser("crack", parents=[common], help="average brute-force crack time")
    p.add_argument("--length", type=_positive_int, required=True)
    p.add_argument("--charset", type=_positive_int, required=True, help="symbol set size")
    p.add_argument("--rate", type=float, help="guesses per second; default calibrates from the reference below")
    p.add_argument("--ref-length", type=_positive_int, default=10)
    p.add_argument("--ref-charset", type=_positive_int, default=62)
    p.add_argument("--ref-days", type=float, default=5.0)
    return parser


def _mode(args) -> CompositionMode | None:
    return CompositionMode(args.mode) if getattr(args, "mode", None) else None


def _run(args):
    if args.command == "catalog":
        return catalog.builtin_measures()
    if args.command == "crack":
        rate = args.rate
        if rate is None:
            rate = calibrated_guess_rate(args.ref_length, args.ref_charset, args.ref_days * SECONDS_PER_DAY)
        if not rate > 0:
            raise InvalidParameter("must be positive", "rate")
        seconds = crack_time(args.length, args.charset, rate)
        return {
            "report": "crack",
            "length": args.length,
            "charset_size": args.charset,
            "guess_rate_per_second": rate,
            "crack_time_seconds": seconds,
            "crack_time_hours": seconds / 3600.0,
            "crack_time_days": seconds / SECONDS_PER_DAY,
        }

    scenario = with_mode(parse_scenario(args.scenario), _mode(args))
    if args.command == "analyze":
        return analyze(scenario)
    if args.command == "simulate":
        return run_trials(scenario, args.trials, args.seed, horizon_hours=args.horizon, workers=args.workers)
    if args.command == "fleet":
        fleet = scenario.fleet
        if fleet is None:
            raise InvalidParameter("scenario has no fleet section", "fleet")
        if args.secret_mode:
            fleet = replace(fleet, secret_mode=SecretMode(args.secret_mode))
        return simulate_fleet(fleet, args.trials, args.seed, workers=args.workers)
    if args.command == "epochs":
        return simulate_epochs(
            scenario,
            args.horizon,
            args.trials,
            args.seed,
            reset_fraction=args.reset_fraction,
            workers=args.workers,
        )
    raise AssertionError(args.command)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _run(args)
        data = emit_report(report, args.format)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.output is not None:
        args.output.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK
