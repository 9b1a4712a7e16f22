"""Command-line entry point: ``construct``, ``verify`` and ``selfcheck``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import load_config, scenario_from_config
from .errors import (
    ConfigError,
    DirichletViolation,
    NonspreadingError,
    SupportEscape,
)
from .runner import EXIT_BOUNDARY, EXIT_CONFIG, EXIT_OK, EXIT_VERDICT, construct, verify, write_construction
from .selfcheck import format_table, run_checks

EXIT_SELFCHECK = 4

log = logging.getLogger("nonspreading")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_construct(config: str, out: str) -> int:
    try:
        sc = scenario_from_config(load_config(config))
        con = construct(sc)
    except SupportEscape as exc:
        print(f"boundary error: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    files = write_construction(con, _out_dir(out))
    if not con.report.consistent:
        print(f"inconsistent: offending powers {list(con.report.offending_powers)}", file=sys.stderr)
        return EXIT_VERDICT
    print("wrote " + ", ".join(files))
    return EXIT_OK


def cmd_verify(config: str, out: str) -> int:
    try:
        sc = scenario_from_config(load_config(config))
        result = verify(sc, _out_dir(out))
    except (SupportEscape, DirichletViolation) as exc:
        print(f"boundary error: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name, value in result.report["verdicts"].items():
        print(f"{name:14s} {'n/a' if value is None else value}")
    return result.exit_code


def cmd_selfcheck() -> int:
    results = run_checks()
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFCHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonspreading", description="Construct and verify nonspreading wave packets.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (
        ("construct", "build shape, motion and phase; write shape/phase/consistency CSVs"),
        ("verify", "construct, propagate and score; write metrics, densities and report.json"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="output directory")
    sub.add_parser("selfcheck", help="run the embedded property suite")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "construct":
            return cmd_construct(args.config, args.out)
        if args.command == "verify":
            return cmd_verify(args.config, args.out)
        return cmd_selfcheck()
    except NonspreadingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
