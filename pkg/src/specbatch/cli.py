"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 invariant violation
detected during a run.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, SpecbatchError
from .harness import (
    ExperimentConfig,
    cmd_dynamic,
    cmd_fit,
    cmd_profile,
    cmd_sweep,
    cmd_timeline,
    cmd_uniform,
)

COMMANDS = {
    "sweep": cmd_sweep,
    "profile": cmd_profile,
    "uniform": cmd_uniform,
    "dynamic": cmd_dynamic,
    "timeline": cmd_timeline,
    "fit": cmd_fit,
}


def _parse_grid(text: str) -> tuple[int, ...]:
    """Accept '0..8' ranges or comma lists like '0,1,2'."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specbatch")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--calibration", help="calibration JSON path or 'rtx3090-like'")
        p.add_argument("--trace", help="acceptance trace CSV path")
        p.add_argument("--sizes", help="comma-separated batch sizes, e.g. 1,2,4,8,16,32")
        p.add_argument("--grid", help="speculation grid, e.g. 0..8 or 0,2,4")
        p.add_argument("--mode", choices=["analytic", "simulated"], help="LUT profiling mode")
        p.add_argument("--samples", type=int, help="profiling requests per cell")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.calibration is not None:
        cfg.calibration = args.calibration
    if args.trace is not None:
        cfg.trace = args.trace
    if args.sizes is not None:
        cfg.sizes = tuple(int(x) for x in args.sizes.split(","))
    if args.grid is not None:
        cfg.s_grid = _parse_grid(args.grid)
    if args.mode is not None:
        cfg.lut_mode = args.mode
    if args.samples is not None:
        cfg.profile_samples = args.samples
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        path = COMMANDS[args.command](cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpecbatchError, ValueError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
