"""Command line entry point: ``plots render --spec <file>``."""

from __future__ import annotations

import argparse
import json
import sys

from .figures import FigureSpec, render
from .io import EmptySeriesError, SchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plots",
                                     description="Render coupled-dyson figures")
    sub = parser.add_subparsers(dest="command", required=True)
    render_p = sub.add_parser("render", help="render one figure from a spec file")
    render_p.add_argument("--spec", required=True, help="JSON figure spec")
    args = parser.parse_args(argv)

    try:
        with open(args.spec) as fh:
            doc = json.load(fh)
        out = render(FigureSpec.from_dict(doc))
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if not isinstance(exc, (SchemaError, EmptySeriesError)) else 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
