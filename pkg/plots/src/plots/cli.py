"""plots command line: plots <kind> --in <paths> --out <file>."""

import argparse
import sys

from . import KINDS, FigureSpec, InputError, render


def _parser():
    ap = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from simulator CSV/JSON/snapshot files.")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--in", dest="inputs", nargs="+", required=True,
                    metavar="PATH", help="input file(s)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--dpi", type=int, default=150)
    ap.add_argument("--title", default=None)
    return ap


def main(argv=None):
    ap = _parser()
    args = ap.parse_args(argv)
    if args.kind in ("sweep", "snapshot") and len(args.inputs) != 1:
        ap.error("kind %r takes exactly one --in path" % args.kind)
    style = {"dpi": args.dpi}
    if args.title is not None:
        style["title"] = args.title
    spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                      out=args.out, style=style)
    try:
        table = render(spec)
    except InputError as exc:
        print("plots error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("plots error: %s" % exc, file=sys.stderr)
        return 1
    if table is not None:
        print(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
