"""Static checks on obligations before anything is executed."""

from __future__ import annotations

from ..errors import Diagnostic
from .expr import BinVo, Leaf, NotVo, leaves
from .tasks import INSPECTION, NEEDS_COMPLETE, UNSUPPORTED

STRICT = "strict"
LENIENT = "lenient"

# tasks that leave visited states behind in the session
STATE_PRODUCING = ("TR", "MC", "OC", "MCDC")
# tasks that explore the whole state space before they finish
EXPLORING = ("MC", "LTL", "CTL", "OC", "MCDC", "VAP")


def _produces_states(vt) -> bool:
    if vt.technique in STATE_PRODUCING:
        return True
    return vt.technique in ("LTL", "CTL") and vt.params.expected == "FAIL"


def occurrences(expr, before: frozenset = frozenset()):
    """(leaf id, ids that run before it on a ``;`` chain) for every leaf."""
    if isinstance(expr, Leaf):
        yield expr.id, before
    elif isinstance(expr, NotVo):
        yield from occurrences(expr.operand, before)
    elif isinstance(expr, BinVo):
        yield from occurrences(expr.left, before)
        right_before = before | frozenset(leaves(expr.left)) if expr.op == "seq" else before
        yield from occurrences(expr.right, right_before)


def needs_auto_explore(vt, before, vts) -> bool:
    """Whether ``vt`` lacks the predecessor its technique needs."""
    prior = [vts[i] for i in before if i in vts and vts[i].machine == vt.machine]
    if vt.technique in INSPECTION:
        return not any(_produces_states(p) for p in prior)
    if vt.technique in NEEDS_COMPLETE:
        return not any(p.technique in EXPLORING for p in prior)
    return False


def _diag(severity: str, code: str, message: str, line: int = 0) -> Diagnostic:
    return Diagnostic(line, 1, severity, message, code)


def check_vo(vo, vts: dict, mode: str = STRICT, req_ids=None) -> list[Diagnostic]:
    """Diagnostics about one obligation."""
    out: list[Diagnostic] = []
    if req_ids is not None:
        for r in vo.validates:
            if r not in req_ids:
                out.append(_diag("error", "unknown-requirement",
                                 f"{vo.id} validates unknown requirement {r}", vo.line))
    reported: set = set()
    for tid, before in occurrences(vo.expr):
        vt = vts.get(tid)
        if vt is None or vt.technique in UNSUPPORTED:
            if tid not in reported:
                if vt is None:
                    out.append(_diag("error", "undefined-task",
                                     f"{vo.id} references undeclared task {tid}", vo.line))
                else:
                    out.append(_diag("error", "unsupported-technique",
                                     f"{vo.id}: {tid} uses {vt.technique}, which is not supported",
                                     vo.line))
            reported.add(tid)
            continue
        if needs_auto_explore(vt, before, vts):
            inspection = vt.technique in INSPECTION
            code = "coverage-without-tasks" if inspection else "no-complete-exploration"
            what = "a state-producing task" if inspection else "a complete exploration"
            if mode == STRICT:
                out.append(_diag("error", code,
                                 f"{vo.id}: {tid} is not preceded by {what} on {vt.machine}",
                                 vo.line))
            else:
                out.append(_diag("warning", code,
                                 f"{vo.id}: {tid} will explore {vt.machine} first", vo.line))
    return out


def semantic_check(vos, vts: dict, mode: str = STRICT, requirements=None) -> list[Diagnostic]:
    """Errors and warnings for a set of obligations.

    In lenient mode a missing predecessor is only a warning: the evaluator
    then explores the state space before running the task.
    """
    out: list[Diagnostic] = []
    seen: set = set()
    used: set = set()
    req_ids = None if requirements is None else {r.id for r in requirements}
    for vo in vos:
        if vo.id in seen:
            out.append(_diag("error", "duplicate-obligation", f"{vo.id} is declared twice",
                             vo.line))
        seen.add(vo.id)
        used.update(leaves(vo.expr))
        out += check_vo(vo, vts, mode, req_ids)
    for tid, vt in vts.items():
        if tid not in used:
            out.append(_diag("warning", "unused-task", f"task {tid} is not used by any obligation",
                             vt.line))
    return out
