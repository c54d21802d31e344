"""Coverage-driven test generation: operation coverage and MC/DC."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import LimitExceeded
from ..model.ast import BinPred, BoolLit, Member, Name, Not, show_pred
from ..model.machine import compile_pred
from ..space import ValidationSession
from .verdict import ERROR, FAIL, SUCCESS, Verdict


def gen_op_coverage(session: ValidationSession, ops: list[str]) -> Verdict:
    """Shortest trace from the root ending with each requested operation."""
    known = {o.name for o in session.machine.operations}
    unknown = [o for o in ops if o not in known]
    if unknown:
        return Verdict(ERROR, f"unknown operation(s): {', '.join(unknown)}")
    overflow = None
    try:
        session.explore()
    except LimitExceeded as e:
        overflow = str(e)
    found = session.space.shortest_paths_to_edges(set(ops))
    traces = [found[o] for o in dict.fromkeys(ops) if o in found]
    missing = [o for o in dict.fromkeys(ops) if o not in found]
    if missing:
        status = ERROR if overflow else FAIL
        msg = f"uncovered: {', '.join(missing)}" + (f" ({overflow})" if overflow else "")
        return Verdict(status, msg, traces=traces, findings=missing)
    return Verdict(SUCCESS, f"covered {len(traces)} operation(s)", traces=traces)


# ---------------------------------------------------------------------- MC/DC

@dataclass(frozen=True)
class Condition:
    op: str
    path: tuple  # position of the condition inside the guard tree
    pred: object

    def __str__(self) -> str:
        return f"{self.op}: {show_pred(self.pred)}"


def _children(p):
    if isinstance(p, BinPred):
        return [p.left, p.right]
    if isinstance(p, Not):
        return [p.operand]
    return []


def conditions(guard, level: int, params=()) -> list[tuple[tuple, object]]:
    """Atomic conditions of ``guard`` down to nesting depth ``level``.

    Connectives are opened up to ``level`` times; anything below is treated
    as one opaque condition. Parameter typing conjuncts are skipped.
    """
    out = []

    def walk(p, path, depth):
        kids = _children(p)
        if not kids or depth == 0:
            if isinstance(p, BoolLit):
                return
            if isinstance(p, Member) and isinstance(p.elem, Name) and p.elem.name in params \
                    and isinstance(p.coll, Name) and not p.negated:
                return
            out.append((path, p))
            return
        for i, k in enumerate(kids):
            walk(k, path + (i,), depth - 1)

    if level > 0:
        walk(guard, (), level)
    return out


def _replace(p, path, value: bool):
    if not path:
        return BoolLit(value)
    i, rest = path[0], path[1:]
    if isinstance(p, Not):
        return Not(_replace(p.operand, rest, value))
    if i == 0:
        return BinPred(p.op, _replace(p.left, rest, value), p.right)
    return BinPred(p.op, p.left, _replace(p.right, rest, value))


def mcdc_requirements(m, level: int) -> list[Condition]:
    reqs = []
    for op in m.operations:
        for path, c in conditions(op.guard, level, op.param_names):
            reqs.append(Condition(op.name, path, c))
    return reqs


def gen_mcdc(session: ValidationSession, level: int) -> Verdict:
    """A condition is covered when reachable states show it deciding the
    guard outcome (other conditions as observed) with both of its values."""
    m = session.machine
    reqs = mcdc_requirements(m, level)
    if not reqs:
        return Verdict(SUCCESS, "no MC/DC requirements at this level")
    overflow = None
    try:
        session.explore()
    except LimitExceeded as e:
        overflow = str(e)
    space = session.space
    traces, missing = [], []
    for req in reqs:
        op = m.operation(req.op)
        params = dict(op.params)
        cond = compile_pred(m, req.pred, params)
        g_true = compile_pred(m, _replace(op.guard, req.path, True), params)
        g_false = compile_pred(m, _replace(op.guard, req.path, False), params)
        bindings = list(itertools.product(*(m.set_elements(t) for _, t in op.params)))
        witnessed = {}
        for s in space.states:
            for b in bindings:
                if g_true(s.values, b) != g_false(s.values, b):
                    pol = bool(cond(s.values, b))
                    witnessed.setdefault(pol, s)
            if len(witnessed) == 2:
                break
        if len(witnessed) == 2:
            for pol in (True, False):
                target = witnessed[pol]
                traces.append(space.shortest_path(lambda s, t=target: s == t))
        else:
            missing.append(req)
    msg = f"{len(reqs) - len(missing)}/{len(reqs)} MC/DC requirements witnessed"
    if missing:
        status = ERROR if overflow else FAIL
        return Verdict(status, msg, traces=traces, findings=[str(r) for r in missing])
    return Verdict(SUCCESS, msg, traces=traces)
