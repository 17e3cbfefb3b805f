"""Verdict bookkeeping shared by the structure checkers and the CLI.

A congruence claim whose truncation bound was insufficient is reported
UNDETERMINED, never PASS.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PASS = "PASS"
FAIL = "FAIL"
UNDETERMINED = "UNDETERMINED"


@dataclass
class CheckItem:
    name: str
    verdict: str
    detail: str = ""

    def line(self) -> str:
        return f"{self.verdict:12s} {self.name}" + (f"  [{self.detail}]" if self.detail else "")


@dataclass
class Report:
    title: str
    items: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool | None, detail: str = "") -> None:
        verdict = UNDETERMINED if ok is None else (PASS if ok else FAIL)
        self.items.append(CheckItem(name, verdict, detail))

    def merge(self, other: "Report", prefix: str = "") -> None:
        for item in other.items:
            self.items.append(CheckItem(prefix + item.name, item.verdict, item.detail))
        self.bounds.update(other.bounds)

    @property
    def ok(self) -> bool:
        return all(i.verdict == PASS for i in self.items)

    @property
    def has_fail(self) -> bool:
        return any(i.verdict == FAIL for i in self.items)

    @property
    def has_undetermined(self) -> bool:
        return any(i.verdict == UNDETERMINED for i in self.items)

    def exit_status(self) -> int:
        if self.has_fail:
            return 1
        if self.has_undetermined:
            return 2
        return 0

    def to_text(self) -> str:
        lines = [f"== {self.title} =="]
        if self.bounds:
            lines.append("bounds: " + ", ".join(f"{k}={v}" for k, v in sorted(self.bounds.items())))
        lines.extend(i.line() for i in self.items)
        summary = "all PASS" if self.ok else ("FAIL" if self.has_fail else "UNDETERMINED")
        lines.append(f"-- {summary} ({len(self.items)} checks)")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            "title": self.title,
            "bounds": {k: self.bounds[k] for k in sorted(self.bounds)},
            "checks": [{"name": i.name, "verdict": i.verdict, "detail": i.detail}
                       for i in self.items],
            "summary": "PASS" if self.ok else ("FAIL" if self.has_fail else "UNDETERMINED"),
        }
        return json.dumps(payload, indent=2, sort_keys=True)
