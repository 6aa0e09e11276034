"""Command line entry point: render one panel from a CSV file."""

import argparse
import sys

from .panels import DEFAULT_MARKER, PANEL_KINDS, PanelSpec, render
from .schema import SchemaError


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="render_panels",
        description="Render a publication-style panel from a simulation CSV.",
    )
    ap.add_argument("csv", help="input CSV written by the simulation CLI")
    ap.add_argument("--kind", required=True, choices=PANEL_KINDS)
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--etas", default=None,
                    help="comma-separated eta values to overlay (default: all)")
    ap.add_argument("--marker", type=float, default=DEFAULT_MARKER,
                    help="g0 position of the dashed vertical marker")
    ap.add_argument("--no-marker", action="store_true",
                    help="suppress the vertical marker")
    ap.add_argument("--title", default=None)
    args = ap.parse_args(argv)

    etas = None
    if args.etas is not None:
        try:
            etas = [float(x) for x in args.etas.split(",") if x.strip()]
        except ValueError:
            print(f"error: bad --etas value {args.etas!r}", file=sys.stderr)
            return 2
    spec = PanelSpec(
        csv_path=args.csv,
        kind=args.kind,
        etas=etas,
        marker=None if args.no_marker else args.marker,
        title=args.title,
    )
    try:
        render(spec, args.out)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        print(f"error: schema: {exc}", file=sys.stderr)
        return 1
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
