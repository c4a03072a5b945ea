"""Command line for rendering figures from simulation CSV outputs."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="aggdiff-figure",
        description="Render density/trajectory figures from aggdiff CSV output.")
    parser.add_argument("--input", nargs="+", required=True,
                        help="snapshots.csv paths (one per curve); combined and "
                             "trajectory kinds use the sibling trajectory.csv")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--label", nargs="*", default=[],
                        help="curve labels (default: run directory names)")
    parser.add_argument("--band", action="store_true",
                        help="shade the diffusion degeneracy band [0.4, 0.6]")
    parser.add_argument("--initial", action="store_true",
                        help="also draw the t=0 density, dashed")
    args = parser.parse_args(argv)

    spec = FigureSpec(inputs=tuple(Path(p) for p in args.input),
                      kind=args.kind, out=Path(args.out),
                      labels=tuple(args.label), band=args.band,
                      show_initial=args.initial)
    try:
        path = render(spec)
    except (FileNotFoundError, ValueError) as exc:
        print(exc, file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
