"""``workbench`` command-line entry point.

Exit codes: 0 all checks passed, 1 some check failed, 2 configuration error,
3 internal anomaly, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import yaml

from . import __version__
from .report import ALL_CHECKS, ConfigError, RunConfig, emit, run, to_structured, to_text

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ANOMALY, EXIT_IO = 0, 1, 2, 3, 4


def _parse_grid(text: str) -> list[tuple[int, int]]:
    """'2,2;3,1' -> [(2, 2), (3, 1)]."""
    out = []
    for chunk in text.replace(" ", "").split(";"):
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"grid entry {chunk!r} is not 'n,s'")
        out.append((int(parts[0]), int(parts[1])))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="workbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a verification campaign")
    r.add_argument("--config", type=Path, help="YAML or JSON configuration file")
    r.add_argument("--grid", type=_parse_grid, action="append", help="n,s pairs, e.g. '2,2;3,1'")
    r.add_argument("--c1", type=float)
    r.add_argument("--c2", type=float)
    r.add_argument("--seed", type=int, action="append", help="may be repeated")
    r.add_argument("--samples", type=int)
    r.add_argument("--checks", help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
    r.add_argument("--out", type=Path, help="output file (default: stdout)")
    r.add_argument("--format", choices=("structured", "text"), default="structured")
    r.add_argument("--timings", action="store_true", help="include wall times (breaks byte stability)")

    e = sub.add_parser("emit", help="re-render a structured report")
    e.add_argument("--in", dest="inp", type=Path, required=True)
    e.add_argument("--format", choices=("structured", "text"), default="text")
    e.add_argument("--out", type=Path)
    return parser


def _load_config_file(path: Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)  # JSON is a subset of YAML
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = _load_config_file(args.config) if args.config else {}
    if args.grid:
        data["grid"] = [g for chunk in args.grid for g in chunk]
    if args.c1 is not None or args.c2 is not None:
        base = RunConfig.from_mapping(data).params[0]
        c1 = base[0] if args.c1 is None else args.c1
        c2 = base[1] if args.c2 is None else args.c2
        data["params"] = [(c1, c2)]
    if args.seed:
        data["seeds"] = args.seed
    if args.samples is not None:
        data["samples"] = args.samples
    if args.checks is not None:
        data["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    return RunConfig.from_mapping(data)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = config_from_args(args)
    except OSError as exc:
        print(f"workbench: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, yaml.YAMLError) as exc:
        print(f"workbench: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run(config, timings=args.timings)
    except ConfigError as exc:
        print(f"workbench: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.out is None:
            _write(to_structured(report) if args.format == "structured" else to_text(report), None)
        else:
            emit(report, args.format, args.out)
    except OSError as exc:
        print(f"workbench: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    for anomaly in report.anomalies:
        print(f"workbench: ANOMALY: {anomaly}", file=sys.stderr)
    return report.exit_code


def _cmd_emit(args: argparse.Namespace) -> int:
    try:
        data = json.loads(args.inp.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"workbench: cannot read report: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"workbench: malformed report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text = to_structured(data) if args.format == "structured" else to_text(data)
    except (KeyError, TypeError) as exc:
        print(f"workbench: malformed report: missing {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _write(text, args.out)
    except OSError as exc:
        print(f"workbench: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_emit(args)


if __name__ == "__main__":
    sys.exit(main())
