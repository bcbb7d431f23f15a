"""Command-line interface: run, calibrate, report, validate-config.

Exit codes: 0 success, 2 configuration error, 3 backend outage (a resume
token is printed), 4 data error (unreadable logs, empty inputs, degenerate
metrics).
"""

from __future__ import annotations

import argparse
import glob
import logging
import sys
from pathlib import Path

from kgfact.config import build_runtime, load_run_config
from kgfact.errors import ConfigError, FatalBackendOutage, KgfactError
from kgfact.harness import calibrate_command, execute_runs, report_command

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OUTAGE = 3
EXIT_DATA = 4


def _expand_logs(patterns: list[str]) -> list[Path]:
    paths = sorted({Path(p) for pattern in patterns for p in glob.glob(pattern)})
    if not paths:
        raise KgfactError(f"no run logs match {patterns}")
    return paths


def _cmd_run(args: argparse.Namespace) -> int:
    runtime = build_runtime(load_run_config(args.config))
    resume = Path(args.resume) if args.resume else None
    paths = execute_runs(runtime, resume_path=resume)
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    _, flags = calibrate_command(
        _expand_logs(args.logs),
        Path(args.out),
        prior_path=Path(args.prior) if args.prior else None,
        timestamp=args.timestamp,
    )
    print(args.out)
    for flag in flags:
        print(f"flag: {flag}", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    summary = report_command(
        _expand_logs(args.logs),
        Path(args.out_dir),
        weight_path=Path(args.weights) if args.weights else None,
        dok_variant=args.dok_variant,
    )
    print(summary)
    return EXIT_OK


def _cmd_validate_config(args: argparse.Namespace) -> int:
    load_run_config(args.config)
    print(f"{args.config}: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgfact",
        description="Dynamic factuality assessment over knowledge-graph questions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the configured assessment runs")
    run.add_argument("--config", required=True, help="run configuration JSON")
    run.add_argument("--resume", help="run log to extend after an outage")
    run.set_defaults(func=_cmd_run)

    cal = sub.add_parser("calibrate", help="fit weights from finished run logs")
    cal.add_argument("--logs", required=True, nargs="+", help="run log glob(s)")
    cal.add_argument("--out", required=True, help="weight file to write")
    cal.add_argument("--prior", help="prior weight file (default: packaged)")
    cal.add_argument("--timestamp", help="calibration timestamp to embed")
    cal.set_defaults(func=_cmd_calibrate)

    rep = sub.add_parser("report", help="summarize finished run logs")
    rep.add_argument("--logs", required=True, nargs="+", help="run log glob(s)")
    rep.add_argument("--out-dir", required=True, help="directory for report files")
    rep.add_argument("--weights", help="weight file for the difficulty reference")
    rep.add_argument("--dok-variant", choices=("aligned", "all"), default="aligned")
    rep.set_defaults(func=_cmd_report)

    val = sub.add_parser("validate-config", help="check a configuration file")
    val.add_argument("config", help="run configuration JSON")
    val.set_defaults(func=_cmd_validate_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FatalBackendOutage as exc:
        print(f"backend outage: {exc}", file=sys.stderr)
        if exc.resume_token:
            print(f"resume with: kgfact run --config ... --resume {exc.resume_token}",
                  file=sys.stderr)
        return EXIT_OUTAGE
    except (KgfactError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
