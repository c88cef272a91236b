"""Command-line entry point: experiment subcommands over a TOML config."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, load_config, resolve_threads

_SUBCOMMANDS = {
    "mix-decay": harness.run_mix_decay,
    "lemma-check": harness.run_lemma_check,
    "fk-validate": harness.run_fk_validate,
    "oscillatory": harness.run_oscillatory,
    "geometry": harness.run_geometry,
    "dissipation": harness.run_dissipation,
    "all": harness.run_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearmix",
        description="Numerical verification suite for shear-flow mixing.")
    parser.add_argument("subcommand", choices=sorted(_SUBCOMMANDS))
    parser.add_argument("--config", required=True, help="TOML config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed override")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (or SHEARMIX_THREADS)")
    parser.add_argument("--nu", default=None,
                        help="comma-separated diffusivity list override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.nu is not None:
        overrides["nu_list"] = [float(v) for v in args.nu.split(",") if v]
    overrides["threads"] = resolve_threads(args.threads)
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        summary = _SUBCOMMANDS[args.subcommand](cfg, out_dir)
    except Exception as exc:
        print(f"{args.subcommand} failed: {exc}", file=sys.stderr)
        raise
    print(json.dumps(_jsonable(summary), indent=2, default=str))
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


if __name__ == "__main__":
    sys.exit(main())
