"""Command line wrapper: ringsfwm-render <grid.csv> [--panel <grid2.csv>]
--out <image>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureJob, ParseError, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringsfwm-render",
        description="Render a normalized heatmap (with marginal side "
                    "panels) from a ringsfwm grid CSV")
    parser.add_argument("grid", help="grid CSV path")
    parser.add_argument("--panel", default=None,
                        help="second grid CSV for a side-by-side panel")
    parser.add_argument("--out", required=True,
                        help="output image path (.png or .svg)")
    parser.add_argument("--no-marginals", action="store_true",
                        help="suppress the marginal side panels")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    job = FigureJob(
        grid_path=Path(args.grid),
        panel_path=Path(args.panel) if args.panel else None,
        out_path=Path(args.out),
        marginals=not args.no_marginals)
    try:
        render(job)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
