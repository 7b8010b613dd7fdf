"""Command-line entry point.

Three subcommands, one per experiment family:

    ohmfit sweep-snr --config fig4 --out results/fig4
    ohmfit recursive --config fig7 --out results/fig7 [--seed N] [--runs M]
    ohmfit dynamic   --config path/to/config.json --out results/custom

--config takes either a shipped recipe name (fig2 .. fig9) or a path to a
flat JSON config. --out falls back to the OHMFIT_OUT environment variable.
Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
Output files are only written after the whole experiment has succeeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, recipes
from .exceptions import ConfigError, OhmfitError, ProfileFormatError
from .experiments import (
    ExperimentConfig,
    run_dynamic_snr,
    run_recursive_compare,
    run_snr_sweep,
)
from .io import write_manifest, write_table

OUT_ENV_VAR = "OHMFIT_OUT"

_COMMAND_EXPERIMENT = {
    "sweep-snr": "sweep_snr",
    "recursive": "recursive",
    "dynamic": "dynamic",
}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ohmfit",
        description="Resistance estimation experiments from noisy current/voltage records.",
    )
    parser.add_argument("--version", action="version", version=f"ohmfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMAND_EXPERIMENT:
        p = sub.add_parser(command, help=f"run a {command} experiment")
        p.add_argument(
            "--config", required=True,
            help=f"recipe name ({', '.join(recipes.names())}) or path to a JSON config",
        )
        p.add_argument(
            "--out", default=None,
            help=f"output directory (default: ${OUT_ENV_VAR})",
        )
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--runs", type=int, default=None, help="override the run count")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def _load_config(spec: str) -> dict:
    if spec in recipes.RECIPES:
        return recipes.get(spec)
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(
            f"config {spec!r} is neither a shipped recipe ({', '.join(recipes.names())}) "
            "nor an existing file"
        )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {spec!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version and 2 for usage errors,
        # matching the documented codes
        return int(exc.code or 0)

    try:
        raw = _load_config(args.config)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.runs is not None:
            raw["n_runs"] = args.runs
        cfg = ExperimentConfig.from_dict(raw)
        expected = _COMMAND_EXPERIMENT[args.command]
        if cfg.experiment != expected:
            raise ConfigError(
                f"config describes a {cfg.experiment!r} experiment; "
                f"the {args.command} command runs {expected!r}"
            )
        out_dir = args.out or os.environ.get(OUT_ENV_VAR)
        if not out_dir:
            raise ConfigError(f"no output directory: pass --out or set ${OUT_ENV_VAR}")
        out_dir = Path(out_dir)
    except (ConfigError, ProfileFormatError) as exc:
        print(f"ohmfit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    started = datetime.now(timezone.utc).isoformat()
    try:
        if cfg.experiment == "sweep_snr":
            outputs = {"sweep.csv": run_snr_sweep(cfg, quiet=args.quiet)}
        elif cfg.experiment == "recursive":
            outputs = {"trace.csv": run_recursive_compare(cfg, quiet=args.quiet)}
        else:
            trace, snr, pcrlb = run_dynamic_snr(cfg, quiet=args.quiet)
            outputs = {"dynamic.csv": trace, "snr.csv": snr, "pcrlb.csv": pcrlb}
    except (ConfigError, ProfileFormatError) as exc:
        print(f"ohmfit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OhmfitError as exc:
        print(f"ohmfit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out_dir.mkdir(parents=True, exist_ok=True)
    for name, table in outputs.items():
        write_table(out_dir / name, table)
    finished = datetime.now(timezone.utc).isoformat()
    write_manifest(
        out_dir,
        command=args.command,
        config=cfg.to_dict(),
        version=__version__,
        started_utc=started,
        finished_utc=finished,
        files=sorted(outputs),
    )
    if not args.quiet:
        print(f"wrote {', '.join(sorted(outputs))} and manifest.json to {out_dir}")
    return EXIT_OK


def run() -> None:
    raise SystemExit(main())
