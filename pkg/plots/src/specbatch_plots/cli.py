"""Command line entry: specbatch-plot <figure-kind> --in <file...> --out <image>."""

from __future__ import annotations

import argparse
import sys

from .figures import (
    render_acceptance,
    render_dynamic,
    render_heatmap,
    render_steptime,
    render_timeline,
    render_uniform,
)
from .io import SchemaError, load_fit

KINDS = ("heatmap", "acceptance", "steptime", "uniform", "dynamic", "timeline")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specbatch-plot")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input result file(s); timeline accepts several")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    parser.add_argument("--calibration", default=None,
                        help="calibration JSON supplying the acceptance fit overlay")
    parser.add_argument("--phase", type=float, default=50.0,
                        help="phase duration in seconds for timeline shading")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "heatmap":
            out = render_heatmap(args.inputs[0], args.out)
        elif args.kind == "acceptance":
            fit = load_fit(args.calibration) if args.calibration else None
            out = render_acceptance(args.inputs[0], args.out, fit=fit)
        elif args.kind == "steptime":
            out = render_steptime(args.inputs[0], args.out)
        elif args.kind == "uniform":
            out = render_uniform(args.inputs[0], args.out)
        elif args.kind == "dynamic":
            out = render_dynamic(args.inputs[0], args.out)
        else:
            out = render_timeline(args.inputs, args.out, phase_duration=args.phase)
    except FileNotFoundError as exc:
        print(f"specbatch-plot: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"specbatch-plot: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
