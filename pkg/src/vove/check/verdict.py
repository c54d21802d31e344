"""Three-valued task verdicts with attached evidence."""

from __future__ import annotations

from dataclasses import dataclass, field

SUCCESS = "SUCCESS"
FAIL = "FAIL"
ERROR = "ERROR"


@dataclass
class Verdict:
    status: str
    message: str = ""
    trace: object = None  # Path (witness or counterexample)
    traces: list = field(default_factory=list)
    table: object = None
    findings: list = field(default_factory=list)
    task_id: str = ""

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS

    def evidence(self) -> dict:
        """JSON-friendly summary of the evidence (no timings, stable order)."""
        out: dict = {}
        if self.message:
            out["message"] = self.message
        if self.trace is not None:
            out["trace"] = self.trace.show()
        if self.traces:
            out["traces"] = [t.show() for t in self.traces]
        if self.findings:
            out["findings"] = [str(f) for f in self.findings]
        if self.table is not None:
            out["table"] = self.table
        return out


def expect(holds: bool, expected: str) -> str:
    """Verdict for a property check against an expected outcome."""
    return SUCCESS if holds == (expected == SUCCESS) else FAIL
