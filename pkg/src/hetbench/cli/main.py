"""Command-line entry point: ``hetbench SUBCOMMAND [--config FILE] ...``."""
from __future__ import annotations

import argparse
import os
import sys

from .commands import COMMANDS, ERRORS, SCHEMAS
from .config import ConfigError, build_config


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hetbench",
                                description="Synthetic heterogeneous cryo-EM datasets and evaluation metrics.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=f"run {name}")
        sp.add_argument("--config", metavar="PATH", help="key = value settings file")
        sp.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        help="override one setting (repeatable)")
        if schema.stochastic:
            sp.add_argument("--seed", type=int, help="random seed (overrides the config)")
        sp.add_argument("--threads", type=int, help="worker threads (overrides the config)")
        sp.add_argument("--print-config", action="store_true",
                        help="print every setting with its current value and exit")
    return p


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set:
        key, eq, value = item.partition("=")
        if not eq or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    if getattr(args, "seed", None) is not None:
        out["seed"] = str(args.seed)
    if args.threads is not None:
        out["threads"] = str(args.threads)
    return out


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    schema = SCHEMAS[args.command]
    try:
        text, base = None, os.getcwd()
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
            base = os.path.dirname(os.path.abspath(args.config))
        overrides = _overrides(args)
        if args.print_config:
            # show defaults even when required keys are still missing
            cfg = build_config(schema, text, args.config or "<defaults>", overrides, base, check_paths=False,
                               check_required=False)
            sys.stdout.write(cfg.describe())
            return 0
        cfg = build_config(schema, text, args.config or "<command line>", overrides, base)
        threads = cfg.get("threads", 1)
        if threads < 1:
            raise ConfigError("threads must be at least 1")
        run_dir = COMMANDS[args.command](cfg, threads)
        manifest = run_dir.finish()
        print(f"{args.command}: wrote {len(run_dir.artifacts)} files, manifest {manifest}")
        return 0
    except ERRORS as e:
        print(f"hetbench {args.command}: error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
