"""Command line front end.

  irl run <experiment> --config cfg.toml [--out DIR] [--workers N] [--assert]
  irl validate --config cfg.toml

``run`` executes one experiment and writes its CSVs; with ``--assert`` it also
evaluates the experiment's expected orderings and exits nonzero on failure.
``validate`` parses and checks a config without running anything.
"""

from __future__ import annotations

import argparse
import sys

from .core import ConfigError
from .experiments import (
    EXPERIMENTS,
    check_assertions,
    load_config,
    print_assertions,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irl",
        description="Reward-inference experiments comparing likelihood "
                    "normalizer strategies.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write its CSV outputs")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", required=True, help="TOML experiment config")
    run.add_argument("--out", default=None, help="output directory override")
    run.add_argument("--workers", type=int, default=None,
                     help="process count override for teacher studies")
    run.add_argument("--assert", dest="check", action="store_true",
                     help="check expected outcome orderings; nonzero exit on failure")

    val = sub.add_parser("validate", help="check a config file without running")
    val.add_argument("--config", required=True, help="TOML experiment config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {args.config}")
        return 0
    try:
        summary = run_experiment(args.experiment, cfg, out_dir=args.out,
                                 workers=args.workers)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out = args.out or cfg.out_dir
    print(f"wrote {args.experiment} outputs to {out}")
    if args.check:
        failed = print_assertions(check_assertions(args.experiment, cfg, summary))
        if failed:
            print(f"{failed} assertion(s) failed", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
