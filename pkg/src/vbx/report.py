"""Check reports: plain records of what was verified and how badly it failed.

Reports are value objects built deterministically from (spec, samples, seed,
tol); serializing one twice gives identical bytes. Each record carries the
worst value its check saw. For residual checks the worst value is a max
residual and passing means worst <= tol; for invertibility checks it is a
min scaled |det| and passing means worst > tol. The record's kind says which
reading applies, and the pass flag is always computed by the check itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

RESIDUAL = "max_residual"
MIN_DET = "min_scaled_det"


@dataclass(frozen=True)
class CheckRecord:
    check: str  # identity being verified, e.g. "pair_cocycle"
    subject: str  # where, e.g. "east->west#0"
    kind: str  # RESIDUAL or MIN_DET
    samples: int
    seed: int
    tol: float
    worst: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class CheckReport:
    suite: str
    records: tuple
    passed: bool


def residual_record(check: str, subject: str, samples: int, seed: int, tol: float,
                    worst: float, note: str = "") -> CheckRecord:
    return CheckRecord(check, subject, RESIDUAL, samples, seed, tol, float(worst),
                       bool(worst <= tol), note)


def det_record(check: str, subject: str, samples: int, seed: int, tol: float,
               worst: float, note: str = "") -> CheckRecord:
    return CheckRecord(check, subject, MIN_DET, samples, seed, tol, float(worst),
                       bool(worst > tol), note)


def failed_record(check: str, subject: str, samples: int, seed: int, tol: float,
                  note: str) -> CheckRecord:
    """A record for a check that could not even be evaluated."""
    return CheckRecord(check, subject, RESIDUAL, samples, seed, tol, float("inf"), False, note)


def vacuous_record(check: str, subject: str, seed: int, tol: float) -> CheckRecord:
    return CheckRecord(check, subject, RESIDUAL, 0, seed, tol, 0.0, True,
                       "vacuous: no qualifying samples")


def make_report(suite: str, records) -> CheckReport:
    recs = tuple(records)
    return CheckReport(suite, recs, all(r.passed for r in recs))


def merge_reports(suite: str, reports) -> CheckReport:
    records = []
    for rep in reports:
        records.extend(rep.records)
    return make_report(suite, records)


def report_to_dict(report: CheckReport) -> dict:
    return {
        "suite": report.suite,
        "passed": report.passed,
        "records": [
            {
                "check": r.check,
                "subject": r.subject,
                "kind": r.kind,
                "samples": r.samples,
                "seed": r.seed,
                "tol": r.tol,
                "worst": r.worst,
                "passed": r.passed,
                "note": r.note,
            }
            for r in report.records
        ],
    }


def report_to_json(report: CheckReport) -> str:
    """Canonical serialization; identical inputs give identical bytes."""
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def format_report(report: CheckReport) -> str:
    """Terminal rendering, one line per record."""
    lines = [f"suite: {report.suite}"]
    for r in report.records:
        mark = "PASS" if r.passed else "FAIL"
        if r.kind == MIN_DET:
            detail = f"min scaled |det| {r.worst:.3e} (tol {r.tol:.1e})"
        elif r.note.startswith("vacuous"):
            detail = r.note
        else:
            detail = f"max residual {r.worst:.3e} (tol {r.tol:.1e})"
        suffix = f" [{r.note}]" if r.note and not r.note.startswith("vacuous") else ""
        lines.append(f"  {mark}  {r.check:<22} {r.subject:<28} {detail}{suffix}")
    lines.append(f"result: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines)
