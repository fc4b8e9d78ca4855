"""Command-line figure rendering.

::

    smclab-plot --kind ess_trace       --input out/trace_rep*.csv out/report.json --out ess.png
    smclab-plot --kind ancestor_decay  --input out/report.json                    --out decay.png
    smclab-plot --kind evidence_box    --input small/report.json big/report.json  --out box.png
    smclab-plot --kind pathvar_growth  --input out/report.json                    --out var.png

Exit codes: 0 success, 1 schema/parse error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, render
from .io import SchemaError

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="smclab-plot",
        description="Render figures from smclab trace CSVs and report JSON files",
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--input", required=True, nargs="+", help="trace CSVs and/or report.json")
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        path = render(FigureSpec(kind=args.kind, inputs=tuple(args.input), output=args.out))
        print(f"wrote {path}")
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
