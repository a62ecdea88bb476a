"""Command-line interface.

    etncheck verify FILE [--check rat|max|zpg|cor1|bsd|all] [--tol X]
                         [--denom-bound N] [--precision-bits N]
                         [--report PATH] [--fetch ENDPOINT]

Exit codes: 0 all checks pass, 1 a check failed, 2 inconclusive, 3 input or
fetch error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .problem import FetchError, ProblemFormatError, fetch_metadata, load_problem
from .report import EXIT_INPUT_ERROR, exit_code, render_json, render_report
from .runner import CHECK_STAGES, VerifyConfig, run_all

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etncheck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run the verification pipeline on a problem file")
    verify.add_argument("file", help="problem file (TOML)")
    verify.add_argument("--check", choices=sorted(CHECK_STAGES), default="all")
    verify.add_argument("--tol", type=float, default=None, help="recognition tolerance (default: from declared digits)")
    verify.add_argument("--denom-bound", type=int, default=10**6)
    verify.add_argument("--precision-bits", type=int, default=192)
    verify.add_argument("--report", default=None, help="also write the report to this path")
    verify.add_argument("--json", action="store_true", help="emit the report as JSON")
    verify.add_argument("--fetch", default=None, help="metadata endpoint used to fill the curve block")
    verify.add_argument("--relabel", type=int, default=1, help=argparse.SUPPRESS)
    verify.add_argument("--twist", type=int, default=1, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.file)
        if args.fetch:
            curve = fetch_metadata(problem.curve.label, args.fetch)
            problem = replace(problem, curve=curve)
        config = VerifyConfig(
            check=args.check,
            tol=args.tol,
            denom_bound=args.denom_bound,
            precision=args.precision_bits,
            relabel=args.relabel,
            twist=args.twist,
        )
        report = run_all(problem, config)
    except (ProblemFormatError, FetchError, OSError, ValueError) as exc:
        print(f"etncheck: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    text = render_json(report) if args.json else render_report(report)
    sys.stdout.write(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    return exit_code(report)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
