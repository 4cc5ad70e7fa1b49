"""Render one figure per invocation from simulator CSV files.

Usage:
    tqdfigs 2a --sweep sweep.csv --out fig2a
    tqdfigs 2b --ensemble ens.csv --trajectory a.csv --trajectory b.csv --out fig2b
    tqdfigs 3a --correlations corr.csv --out fig3a
    tqdfigs 4a --jump jump.csv --out fig4a

Each run writes <out>.png and <out>.svg.  Exit codes: 0 success,
2 bad inputs or schema mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .plots import FIGURE_IDS, FigureSpec, plot_figure


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tqdfigs", description="render simulator figures from CSV output")
    parser.add_argument("figure", choices=FIGURE_IDS, help="figure id")
    parser.add_argument("--sweep", help="stationary-state sweep CSV (2a, s1)")
    parser.add_argument("--ensemble", help="ensemble statistics CSV (2b)")
    parser.add_argument("--trajectory", action="append", default=[],
                        help="diffusive trajectory CSV, repeatable (2b)")
    parser.add_argument("--correlations", help="correlation scan CSV (3a, 3b)")
    parser.add_argument("--jump", help="detection trajectory CSV (4a, 4b); "
                                       "its .manifest.json and .jumps.json "
                                       "sidecars must sit alongside")
    parser.add_argument("--out", required=True,
                        help="output image stem (writes .png and .svg)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        figure_id=args.figure,
        inputs={
            "sweep": args.sweep,
            "ensemble": args.ensemble,
            "trajectories": args.trajectory,
            "correlations": args.correlations,
            "jump": args.jump,
        },
        output=args.out,
    )
    try:
        paths = plot_figure(spec)
    except (SchemaError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
