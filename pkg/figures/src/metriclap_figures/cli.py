"""CLI: metriclap-figures render --kind <k> --in <csv...> --out <png>."""

from __future__ import annotations

import argparse

from .render import KIND_SOURCES, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metriclap-figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a figure from experiment CSVs")
    p.add_argument("--kind", required=True, choices=sorted(KIND_SOURCES))
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   help="input CSV files")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        inputs=tuple(args.inputs), kind=args.kind, output=args.out, dpi=args.dpi
    )
    info = render(spec)
    print(f"{args.out}: {info.kind} figure, {info.n_series} series, "
          f"{info.n_points} points")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
