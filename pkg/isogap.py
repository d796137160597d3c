#!/usr/bin/env python3
"""isogap - Spectral gaps of averaging operators on the rigid motions of R^3.

Thin entry point::

    isogap <command> --config <job.json> [--out DIR] [--seed U64] [--threads N]

Commands: rotation-gap, profile, verify, reduce, lsg, oracle.

Exit statuses: 0 ok, 2 usage (bad flags, config or inputs), 3 preflight (an
assumption of the requested run fails), 4 numerical (a solver gave up or a
postcondition failed).  On failure the machine-readable error JSON goes to
stderr and to ``<out>/error.json`` when the output directory is known.

Architecture layers:
  domain/          Isometries, measures, the convolution algebra, ports, errors
  spectral/        Harmonics, quadrature, band-limited operators, norms
  application/     Profiles, verifier, reduction, LSG estimator, orchestrator
  infrastructure/  Config, logging, run journal, artifacts, DI container
"""

from __future__ import annotations

import argparse
import os
import sys

_SCRIPT_DIR = os.path.dirname(os.path.abspath(__file__))
if _SCRIPT_DIR not in sys.path:
    sys.path.insert(0, _SCRIPT_DIR)

from domain.errors import IsogapError  # noqa: E402
from utils.validators import COMMANDS, MAX_SEED  # noqa: E402

APP_VERSION = "0.1.0"

EXIT_OK = 0
EXIT_USAGE = 2


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from exc
    if not 0 <= value < MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def _threads(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"threads must be an integer, got {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isogap",
        description="Spectral gaps of averaging operators on Isom(R^3).",
    )
    parser.add_argument("--version", action="version", version=f"isogap {APP_VERSION}")
    parser.add_argument("command", choices=COMMANDS, help="pipeline to run")
    parser.add_argument("--config", required=True, help="job configuration JSON file")
    parser.add_argument("--out", default=None, help="output directory (overrides job.output)")
    parser.add_argument("--seed", type=_seed, default=None, help="64-bit seed (overrides job.seed)")
    parser.add_argument("--threads", type=_threads, default=None,
                        help="worker threads for grid evaluations")
    parser.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"),
                        type=str.upper, help="log level (default: ISOGAP_LOG_LEVEL or INFO)")
    parser.add_argument("--json-logs", action="store_true", default=None,
                        help="JSON log lines on stderr even on a TTY")
    return parser


def _report_error(payload: dict[str, object]) -> None:
    from infrastructure.artifacts.store import encode_json

    sys.stderr.write(encode_json(payload))
    sys.stderr.flush()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    from pydantic import ValidationError

    from infrastructure.config.settings import get_settings

    try:
        settings = get_settings()
    except ValidationError as exc:
        _report_error({
            "error": "settings", "category": "usage", "exit_status": EXIT_USAGE,
            "message": f"invalid ISOGAP_* environment ({exc.error_count()} problems)",
            "details": {"problems": [str(e["msg"]) for e in exc.errors()]},
        })
        return EXIT_USAGE

    import logging

    from infrastructure.di.container import Container
    from infrastructure.logging.setup import configure_logging, set_run_id

    configure_logging(
        level=args.log_level or settings.log_level,
        json_output=args.json_logs if args.json_logs is not None else settings.json_logs,
        log_file=settings.log_file,
    )
    logger = logging.getLogger("isogap")
    run_id = set_run_id()
    logger.info("isogap %s: %s (run %s)", APP_VERSION, args.command, run_id)

    try:
        container = Container.build(
            args.config, args.command, output=args.out, seed=args.seed,
            threads=args.threads, run_id=run_id, settings=settings,
        )
    except IsogapError as exc:
        logger.error("%s", exc.message)
        _report_error(exc.to_dict())
        return exc.exit_status

    try:
        outcome = container.run()
    finally:
        container.close()

    if not outcome.ok:
        _report_error(outcome.error or {})
        return outcome.exit_status

    from infrastructure.artifacts.store import encode_json

    sys.stdout.write(encode_json({"command": outcome.command, "summary": outcome.summary,
                                  "artifacts": outcome.artifacts}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
