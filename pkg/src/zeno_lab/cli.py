"""Command-line entry point.

Subcommands map onto run modes:

    simulate   single trajectories (pulsed_traj, continuous_traj) and
               poisson_ensemble when asked for explicitly
    ensemble   nonselective dynamics (ensemble_ode, poisson_ensemble)
    sweep      sweep_heatmap
    rates      rates_scan
    validate   self-check suite, no config needed

Settings come from an optional config file, then repeatable --set
key=value overrides, then the dedicated flags (--seed, --workers,
--format, --out), each layer winning over the previous one.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config_file, parse_config
from .errors import (
    DataIntegrityError,
    InsufficientDataError,
    PositivityError,
    ReadoutUnderflowError,
    RegimeError,
    ZeroProbabilityError,
)
from .runner import run, summary_line

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

_NUMERICAL_ERRORS = (
    PositivityError,
    ReadoutUnderflowError,
    ZeroProbabilityError,
    InsufficientDataError,
    DataIntegrityError,
)

# Modes each subcommand accepts; first entry is the default where one exists.
_SUBCOMMAND_MODES = {
    "simulate": ("pulsed_traj", "continuous_traj", "poisson_ensemble"),
    "ensemble": ("ensemble_ode", "poisson_ensemble"),
    "sweep": ("sweep_heatmap",),
    "rates": ("rates_scan",),
}
_DEFAULT_MODE = {
    "ensemble": "ensemble_ode",
    "sweep": "sweep_heatmap",
    "rates": "rates_scan",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeno-lab",
        description="Quantum Zeno and anti-Zeno dynamics of a driven, measured qubit.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--seed", metavar="U64", help="master seed (unsigned 64-bit)")
    common.add_argument("--workers", metavar="N", help="worker process count")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--out", metavar="PATH", help="output file path")
    common.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )

    sub.add_parser(
        "simulate",
        parents=[common],
        help="single measurement trajectory or sampled ensemble",
    )
    sub.add_parser("ensemble", parents=[common], help="nonselective ensemble dynamics")
    sub.add_parser("sweep", parents=[common], help="survival heatmap over a rate grid")
    sub.add_parser("rates", parents=[common], help="mixing rate and response scan")
    sub.add_parser("validate", help="run the built-in self checks")
    return parser


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    for item in args.assignments:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key] = value.strip()
    # Dedicated flags outrank --set for the same key.
    for key in ("seed", "workers", "format", "out"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return overrides


def _config_defines_mode(path: str) -> bool:
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if line.startswith("mode") and line.partition("=")[0].strip() == "mode":
                return True
    return False


def _load(args: argparse.Namespace) -> object:
    overrides = _collect_overrides(args)
    default = _DEFAULT_MODE.get(args.command)
    if default is not None and "mode" not in overrides:
        if args.config is None or not _config_defines_mode(args.config):
            overrides["mode"] = default
    if args.config is not None:
        config = load_config_file(args.config, overrides)
    else:
        config = parse_config(None, overrides)
    allowed = _SUBCOMMAND_MODES[args.command]
    if config.mode not in allowed:
        raise ConfigError(
            f"mode {config.mode!r} is not valid for the {args.command!r} "
            f"subcommand (expected one of {', '.join(allowed)})"
        )
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "validate":
        from .validate import run_validation

        try:
            ok = run_validation()
        except Exception as exc:  # noqa: BLE001 - report, then fail
            print(f"validate: unexpected error: {exc!r}", file=sys.stderr)
            return EXIT_UNEXPECTED
        return EXIT_OK if ok else EXIT_NUMERICAL

    try:
        config = _load(args)
        summary = run(config)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 1
        print(f"unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_UNEXPECTED

    print(summary_line(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
