#!/usr/bin/env python3
"""Render one figure from a JSON spec:

    python3 plots/render.py --spec figure.json

The spec names the figure kind, the input CSV/JSON files (the lab's
documented output schemas), and the image path to write.  Exit codes:
0 success, 1 bad spec or missing column (named on stderr).
"""

import argparse
import sys

from figures import ColumnError, FigureSpec, SpecError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render.py", description=__doc__)
    parser.add_argument("--spec", required=True, help="figure spec JSON")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec)
        meta = render(spec)
    except (SpecError, ColumnError, OSError, ValueError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    print(meta["output"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
