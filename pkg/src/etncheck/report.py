"""Deterministic renderings of verification reports and the exit-code map.

Two renderings of the same structure: a human-diffable text form and a JSON
form for machine consumption; both have stable field order.  Exit codes:
0 all pass, 1 any failed check, 2 inconclusive (and nothing failed),
3 input error (raised before a report exists).
"""

from __future__ import annotations

import json

from .criteria import FAIL, INCONCLUSIVE, VerificationReport

__all__ = ["render_report", "render_json", "exit_code"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3


def render_report(report: VerificationReport) -> str:
    lines: list[str] = ["etncheck verification report"]
    for key, value in report.metadata.items():
        lines.append(f"{key}: {value}")
    lines.append("")
    for result in report.results:
        lines.append(f"[{result.name}] {result.status}")
        for key, value in result.details.items():
            lines.append(f"  {key} = {value}")
        for note in result.notes:
            lines.append(f"  note: {note}")
    lines.append("")
    lines.append(f"exit code: {exit_code(report)}")
    lines.append("")
    return "\n".join(lines)


def render_json(report: VerificationReport) -> str:
    doc = {
        "metadata": dict(report.metadata),
        "checks": [
            {
                "name": r.name,
                "status": r.status,
                "details": dict(r.details),
                "notes": list(r.notes),
            }
            for r in report.results
        ],
        "exit_code": exit_code(report),
    }
    return json.dumps(doc, indent=2) + "\n"


def exit_code(report: VerificationReport) -> int:
    if report.has_status(FAIL):
        return EXIT_FAIL
    if report.has_status(INCONCLUSIVE):
        return EXIT_INCONCLUSIVE
    return EXIT_OK
