"""Command-line entry: mirror FigureSpec fields onto flags.

Exit codes follow the simulator's convention: 0 success, 1 bad input data
(schema mismatch, unreadable file), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FORMATS, FigureSpec, SchemaError, StyleOptions, plot_sectors, plot_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitbell-plots",
        description="Render figures from splitbell CSV output",
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output", required=True,
                       help="image path; bare stem writes every --format")
        p.add_argument("--format", action="append", choices=FORMATS, dest="formats",
                       help="repeatable; default: png and svg")
        p.add_argument("--dpi", type=int, default=150)
        p.add_argument("--title", default=None)

    p_sweep = sub.add_parser("sweep-curves", help="B vs r, one curve per (approach, gamma)")
    p_sweep.add_argument("sweep_csv", help="sweep or fullham CSV")
    p_sweep.add_argument("--exact", default=None, help="closed-form CSV to overlay")
    add_common(p_sweep)

    p_sectors = sub.add_parser("sector-heatmap", help="one panel per particle-number sector")
    p_sectors.add_argument("probs_csv", help="probs CSV")
    add_common(p_sectors)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    style = StyleOptions(
        dpi=args.dpi,
        title=args.title,
        formats=tuple(args.formats) if args.formats else FORMATS,
    )
    if args.kind == "sweep-curves":
        inputs = (args.sweep_csv,) + ((args.exact,) if args.exact else ())
        spec = FigureSpec("sweep-curves", inputs, args.output, style)
        render = plot_sweep
    else:
        spec = FigureSpec("sector-heatmap", (args.probs_csv,), args.output, style)
        render = plot_sectors
    try:
        written = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
