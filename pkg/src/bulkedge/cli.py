"""Command-line front end.

Subcommands mirror the experiment kinds plus ``validate``; every run needs a
config file.  Exit codes: 0 success, 1 usage or config problem, 2 the model
failed a physics-level requirement (closed gap, no plateau).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ExperimentConfig, EXPERIMENTS, OUT_DIR_ENV
from .errors import BulkEdgeError, ConfigError, PhysicsError


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1, not 2)."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="bulkedge",
        description=(
            "Numerical lab for bulk-boundary physics of tight-binding insulators: "
            "spectra, Chern numbers, gap filling, edge indices."
        ),
    )
    sub = parser.add_subparsers(dest="command")
    for name in EXPERIMENTS + ("validate",):
        p = sub.add_parser(name, help=f"run the {name} experiment" if name != "validate" else "check a config without running")
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--out", default=None, help=f"output directory (default: config out_dir, then ${OUT_DIR_ENV}, then ./runs)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweep points (0 = auto)")
        p.add_argument("--seed-override", type=int, default=None, help="replace the model seed and the ensemble seed list")
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    if args.command != "validate" and config.experiment != args.command:
        raise ConfigError(
            f"config declares experiment {config.experiment!r} but the "
            f"{args.command!r} subcommand was invoked"
        )
    if args.seed_override is not None:
        seeds = (args.seed_override,) if config.seeds else config.seeds
        config = replace(
            config,
            model=replace(config.model, seed=args.seed_override),
            seeds=seeds,
        )
    return config


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("bulkedge: choose a subcommand", file=sys.stderr)
            return 1
        config = _load_config(args)
        if args.command == "validate":
            for line in config.validate():
                print(line)
            return 0
        from .runner import run

        out_dir = config.resolve_out_dir(args.out)
        report, code = run(config, out_dir=out_dir, threads=args.threads)
        print(f"report written to {out_dir}/report.json")
        if code != 0:
            err = report.results.get("error", "physics-level failure")
            print(f"bulkedge: {err}", file=sys.stderr)
        return code
    except PhysicsError as exc:
        print(f"bulkedge: {exc}", file=sys.stderr)
        return 2
    except BulkEdgeError as exc:
        print(f"bulkedge: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
