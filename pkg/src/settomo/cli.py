"""Command line entry point: ``settomo run CONFIG [--seed N] [--stages a,b] [--out DIR]``.

Exit status is 0 on success, 1 when a stage fails and 2 for configuration
errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .pipeline import STAGES, ConfigError, StageError, load_config, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="settomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a pipeline from a JSON config")
    p.add_argument("config", help="path to the JSON config")
    p.add_argument("--seed", type=int, help="override protocol.rng_seed")
    p.add_argument("--stages", help=f"comma-separated subset of: {','.join(STAGES)} (empty string for none)")
    p.add_argument("--out", help="write all outputs into this directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg.protocol = replace(cfg.protocol, rng_seed=args.seed)
    if args.stages is not None:
        stages = [s.strip() for s in args.stages.split(",") if s.strip()]
        bad = [s for s in stages if s not in STAGES]
        if bad:
            raise ConfigError(f"unknown stage(s) {', '.join(bad)}; choose from {', '.join(STAGES)}")
        cfg.pipeline = stages
    if args.out is not None:
        out = Path(args.out)
        cfg.outputs = {
            "report_path": str(out / Path(cfg.outputs["report_path"]).name),
            "records_path": str(out / Path(cfg.outputs["records_path"]).name),
            "matrices_path": str(out / Path(cfg.outputs["matrices_path"]).name),
        }
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        where = f"{args.config}:{exc.line}" if exc.line else args.config
        print(f"{where}: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.config}: cannot read config: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        run(cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
