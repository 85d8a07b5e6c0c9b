"""Command line front end: pick a figure kind, point at run output."""

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, render
from .schema import SchemaError


def build_parser():
    p = argparse.ArgumentParser(
        prog="reportplots",
        description="render report figures from solver run directories")
    p.add_argument("kind", choices=FIGURE_KINDS + ("all",))
    p.add_argument("--in", dest="indir", required=True,
                   help="run directory, or a directory of run directories")
    p.add_argument("--out", dest="outdir", required=True)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    kinds = FIGURE_KINDS if args.kind == "all" else (args.kind,)
    try:
        for kind in kinds:
            res = render(FigureSpec(kind, args.indir, args.outdir))
            print(res.path)
    except (SchemaError, OSError) as e:
        print("reportplots: %s" % e, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
