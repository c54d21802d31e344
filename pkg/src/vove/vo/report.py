"""Evaluation reports as text tables and versioned JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..check.verdict import SUCCESS
from .evaluate import VoResult, task_outcomes

SCHEMA = 1


@dataclass
class EvalReport:
    results: list = field(default_factory=list)  # VoResult in declaration order
    diagnostics: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.status == SUCCESS for r in self.results)

    def result(self, vo_id: str) -> VoResult:
        for r in self.results:
            if r.id == vo_id:
                return r
        raise KeyError(vo_id)


def _task_entry(o, vts) -> dict:
    vt = vts.get(o.task)
    entry = {"id": o.task, "technique": vt.technique if vt else "", "status": o.status}
    if o.reused:
        entry["reused"] = True
    if o.verdict is not None:
        entry["evidence"] = o.verdict.evidence()
    return entry


def to_json_dict(report: EvalReport, vts: dict) -> dict:
    """Deterministic content only: no timings, declaration order throughout."""
    obligations = []
    for r in report.results:
        obligations.append({
            "id": r.id,
            "status": r.status,
            "validates": list(r.vo.validates),
            "blame": list(r.blame),
            "tasks": [_task_entry(o, vts) for o in task_outcomes(r.outcome)],
            "diagnostics": [str(d) for d in r.diagnostics],
        })
    counts: dict = {}
    for r in report.results:
        counts[r.status] = counts.get(r.status, 0) + 1
    return {
        "schema": SCHEMA,
        "settings": report.settings,
        "summary": {"obligations": len(report.results), **dict(sorted(counts.items()))},
        "obligations": obligations,
        "diagnostics": [str(d) for d in report.diagnostics],
    }


def to_json(report: EvalReport, vts: dict) -> str:
    return json.dumps(to_json_dict(report, vts), indent=2, ensure_ascii=False) + "\n"


def to_text(report: EvalReport, timings: bool = True) -> str:
    rows = [("VO", "STATUS", "VALIDATES") + (("TIME",) if timings else ())]
    for r in report.results:
        row = (r.id, r.status, ",".join(r.vo.validates) or "-")
        if timings:
            row += (f"{r.elapsed:.2f}s",)
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    for r in report.results:
        if r.status != SUCCESS:
            lines.append(f"{r.id}: possible error sources: {', '.join(r.blame) or '-'}")
            for o in task_outcomes(r.outcome):
                if o.status != SUCCESS and o.verdict is not None:
                    lines.append(f"  {o.task}: {o.status}: {o.verdict.message}")
            for d in r.diagnostics:
                if d.kind == "error":
                    lines.append(f"  {d}")
    passed = sum(r.status == SUCCESS for r in report.results)
    lines.append(f"{passed}/{len(report.results)} obligations succeeded")
    return "\n".join(lines) + "\n"
