"""Command-line entry points for the figure renderers.

Usage: ``unravel-figures <figure> [inputs...] --out BASE`` where BASE is the
output path without extension (PNG and SVG are written).  Run with no
arguments to list the figure names.
"""

from __future__ import annotations

import argparse
import sys

from . import render
from .io import FigureError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unravel-figures", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="figure", required=True)

    p = sub.add_parser("entropy-vs-time", help="semilog time traces with the transient marker")
    p.add_argument("--timeseries", nargs="+", required=True)
    p.add_argument("--t-star", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("entropy-vs-field", help="field scans, one panel per rate")
    p.add_argument("--asymptotic", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("entropy-vs-size", help="size scans with optional fit overlays")
    p.add_argument("--asymptotic", required=True)
    p.add_argument("--fits")
    p.add_argument("--out", required=True)

    p = sub.add_parser("lambda-vs-field", help="fitted scale vs field with the guide line")
    p.add_argument("--fits", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("unraveling-comparison", help="clicks vs diffusive size scans")
    p.add_argument("--asymptotic", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("nonhermitian-panels", help="no-click traces plus asymptotics")
    p.add_argument("--timeseries", nargs="+", required=True)
    p.add_argument("--asymptotic", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("correlation-decay", help="log-log correlation profiles")
    p.add_argument("--correlations", nargs="+", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("phase-diagram", help="crossover estimates in the field-rate plane")
    p.add_argument("--phase", required=True)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.figure == "entropy-vs-time":
            paths = render.entropy_vs_time(args.timeseries, args.out, t_star=args.t_star)
        elif args.figure == "entropy-vs-field":
            paths = render.entropy_vs_field(args.asymptotic, args.out)
        elif args.figure == "entropy-vs-size":
            paths = render.entropy_vs_size(args.asymptotic, args.out, fits_path=args.fits)
        elif args.figure == "lambda-vs-field":
            paths = render.lambda_vs_field(args.fits, args.out)
        elif args.figure == "unraveling-comparison":
            paths = render.unraveling_comparison(args.asymptotic, args.out)
        elif args.figure == "nonhermitian-panels":
            paths = render.nonhermitian_panels(args.timeseries, args.asymptotic, args.out)
        elif args.figure == "correlation-decay":
            paths = render.correlation_decay(args.correlations, args.out)
        elif args.figure == "phase-diagram":
            paths = render.phase_diagram(args.phase, args.out)
        else:  # pragma: no cover - argparse enforces choices
            raise FigureError(f"unknown figure {args.figure!r}")
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
