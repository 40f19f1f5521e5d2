#!/usr/bin/env python3
"""
Experiment runner CLI for retlab.

Runs one experiment per invocation, writes its CSV and JSON sidecar, and
prints a summary table on stderr. Exit codes: 0 success, 2 configuration
error, 3 property failure, 1 any other library error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from lab_cli.config import SUBCOMMANDS, ExperimentConfig
from lab_cli.experiments import run_experiment
from lab_cli.reporting import print_summary, write_csv, write_sidecar
from retlab.core.errors import ConfigInvalidError, PolicyValidationError, RetractionLabError
from retlab.core.logging import LabLogger, configure_structlog

try:
    import importlib.metadata

    __version__ = importlib.metadata.version("dual-retraction-lab")
except Exception:
    __version__ = "unknown"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_FAILURES = 3


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment and shared override flags."""
    parser = argparse.ArgumentParser(
        prog="retlab",
        description="Dual-ball retraction and Bishop-Phelps-Bollobas experiments",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, help=f"run the {kind.value} experiment")
        sub.add_argument(
            "--config",
            type=Path,
            default=Path("config/experiments") / f"{name}.json",
            metavar="PATH",
            help=f"experiment config JSON (default: config/experiments/{name}.json)",
        )
        sub.add_argument("--seed", type=int, default=None, help="override the config seed")
        sub.add_argument("--samples", type=int, default=None, help="override the sample count")
        sub.add_argument("--out", default=None, metavar="PATH", help="override the CSV output path")
        sub.add_argument("--workers", type=int, default=None, help="thread pool size")
        sub.add_argument("--log-json", action="store_true", help="emit JSON log lines on stderr")
        sub.add_argument(
            "--log-level",
            default="WARNING",
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            help="log level (default: WARNING)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    configure_structlog(getattr(logging, args.log_level), use_json=args.log_json)
    kind = SUBCOMMANDS[args.command]

    try:
        config = ExperimentConfig.from_file(
            args.config,
            seed=args.seed,
            samples=args.samples,
            output_path=args.out,
            workers=args.workers,
        )
        if config.experiment is not kind:
            raise ConfigInvalidError(
                f"{args.config} configures {config.experiment.value}, not {kind.value}"
            )
        report = run_experiment(config, LabLogger("lab_cli"))
    except (ConfigInvalidError, PolicyValidationError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RetractionLabError as e:
        print(f"ERROR: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR

    write_csv(config.output_path, report.columns, report.rows)
    write_sidecar(config.sidecar_path(), config.model_dump(mode="json"), report)
    print_summary(report, config.output_path)
    return EXIT_OK if report.passed else EXIT_FAILURES


if __name__ == "__main__":
    sys.exit(main())
