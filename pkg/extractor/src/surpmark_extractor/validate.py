"""Conformance checks for surprisal JSONL files.

Validates the interchange schema the detector consumes: one object per
line with an id, an optional human/machine label, and a list of at least
two finite numeric surprisals. Implemented standalone so the validator
reflects the documented wire format, not any library internals.
"""

import json
import math
from dataclasses import dataclass, field

LABELS = ("human", "machine")


@dataclass(frozen=True)
class LineIssue:
    line: int
    message: str


@dataclass(frozen=True)
class ValidationReport:
    path: str
    records: int
    issues: tuple

    @property
    def ok(self):
        return not self.issues

    def to_dict(self):
        return {"path": self.path, "records": self.records,
                "ok": self.ok,
                "issues": [{"line": i.line, "message": i.message}
                           for i in self.issues]}


def _check_record(obj, line, issues):
    if not isinstance(obj, dict):
        issues.append(LineIssue(line, "record is not an object"))
        return
    if "id" not in obj:
        issues.append(LineIssue(line, "missing 'id'"))
    label = obj.get("label")
    if label is not None and label not in LABELS:
        issues.append(LineIssue(line, f"label {label!r} not in {LABELS}"))
    surprisals = obj.get("surprisals")
    if not isinstance(surprisals, list):
        issues.append(LineIssue(line, "'surprisals' missing or not a list"))
        return
    if len(surprisals) < 2:
        issues.append(LineIssue(line, f"{len(surprisals)} surprisal(s), "
                                      "need at least 2"))
    for i, value in enumerate(surprisals):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            issues.append(LineIssue(line, f"surprisals[{i}] is not a number"))
            break
        if not math.isfinite(value):
            issues.append(LineIssue(line, f"surprisals[{i}] is not finite"))
            break


def validate_jsonl(path):
    """Check a surprisal JSONL file; every violation carries its line number."""
    issues = []
    records = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                issues.append(LineIssue(line_no, f"invalid JSON: {exc}"))
                continue
            records += 1
            _check_record(obj, line_no, issues)
    return ValidationReport(path=str(path), records=records,
                            issues=tuple(issues))
