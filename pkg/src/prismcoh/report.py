"""Structured pass/fail records shared by every verifier and the CLI."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
REPORT_ONLY = "report-only"


@dataclass
class ReportItem:
    label: str
    anchor: str
    status: str
    counterexample: Any = None
    detail: Any = None
    timing: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "label": self.label,
            "anchor": self.anchor,
            "status": self.status,
            "counterexample": self.counterexample,
            "detail": self.detail,
        }
        if timing:
            out["timing"] = round(self.timing, 6)
        return out


@dataclass
class VerificationReport:
    """An ordered list of checked identities.

    Each item's ``timing`` is the wall time since the previous item was
    recorded, so callers just interleave computation and ``check`` calls.
    """

    suite: str
    items: list[ReportItem] = field(default_factory=list)
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._clock = time.perf_counter()

    def _lap(self) -> float:
        now = time.perf_counter()
        dt, self._clock = now - self._clock, now
        return dt

    def check(self, label: str, anchor: str, ok: bool, counterexample: Any = None,
              detail: Any = None) -> bool:
        ok = bool(ok)
        if not ok and counterexample is None:
            counterexample = detail if detail is not None else {"note": "identity does not hold"}
        self.items.append(ReportItem(label, anchor, PASS if ok else FAIL,
                                     None if ok else _jsonable(counterexample),
                                     _jsonable(detail), self._lap()))
        return ok

    def note(self, label: str, anchor: str, detail: Any = None) -> None:
        self.items.append(ReportItem(label, anchor, REPORT_ONLY, None, _jsonable(detail), self._lap()))

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for it in other.items:
            self.items.append(ReportItem(prefix + it.label, it.anchor, it.status,
                                         it.counterexample, it.detail, it.timing))

    @property
    def ok(self) -> bool:
        return all(it.status != FAIL for it in self.items)

    def failures(self) -> list[ReportItem]:
        return [it for it in self.items if it.status == FAIL]

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "meta": _jsonable(self.meta),
            "ok": self.ok,
            "items": [it.to_dict(timing) for it in self.items],
        }

    def to_text(self) -> str:
        lines = [f"== {self.suite} =="]
        for it in self.items:
            lines.append(f"[{it.status:>11}] {it.label}  ({it.anchor})")
            if it.status == FAIL:
                lines.append(f"              counterexample: {it.counterexample}")
            elif it.status == REPORT_ONLY and it.detail is not None:
                lines.append(f"              {it.detail}")
        lines.append(f"-- {sum(i.status == PASS for i in self.items)} pass, "
                     f"{len(self.failures())} fail, "
                     f"{sum(i.status == REPORT_ONLY for i in self.items)} report-only")
        return "\n".join(lines)


def _jsonable(x: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into plain JSON types."""
    import numpy as np

    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)
