"""Detection of vacuous invariant and guard parts."""

from __future__ import annotations

import itertools

from ..errors import LimitExceeded
from ..model.ast import BinPred, Member, Name, Range, conjoin, conjuncts, disjuncts, show_pred
from ..model.machine import EnumType, IntType, _const_int, all_typed_states, compile_pred
from ..space import ValidationSession
from .verdict import ERROR, FAIL, SUCCESS, Verdict


def _is_typing(p, m, params: dict) -> bool:
    """``v : T`` where T is exactly the declared type of v."""
    if not (isinstance(p, Member) and not p.negated and isinstance(p.elem, Name)):
        return False
    n = p.elem.name
    if n in params:
        return isinstance(p.coll, Name) and p.coll.name == params[n]
    if n not in m.var_names:
        return False
    t = m.var_type(n)
    if isinstance(t, EnumType):
        return isinstance(p.coll, Name) and p.coll.name == t.name
    if isinstance(t, IntType):
        return (isinstance(p.coll, Range) and _const_int(p.coll.lo) == t.lo
                and _const_int(p.coll.hi) == t.hi)
    return False


def _subparts(p):
    """Implications and disjunctions nested anywhere below the conjunct level."""
    if isinstance(p, BinPred):
        if p.op in ("=>", "or"):
            yield p
        yield from _subparts(p.left)
        yield from _subparts(p.right)


def find_vacuous(m, pred, domain, params: dict, where: str, reach=None) -> list[str]:
    """Findings for one predicate.

    Conjuncts are judged over ``domain`` = [(values, param tuple)]; implication
    antecedents and disjuncts over ``reach`` (defaults to ``domain``).
    """
    findings = []
    parts = conjuncts(pred)
    full = compile_pred(m, pred, params)
    truth = [bool(full(v, b)) for v, b in domain]
    for i, c in enumerate(parts):
        if _is_typing(c, m, params):
            continue
        rest = conjoin(parts[:i] + parts[i + 1:])
        fn = compile_pred(m, rest, params)
        if all(bool(fn(v, b)) == t for (v, b), t in zip(domain, truth)):
            findings.append(f"{where}: conjunct {show_pred(c)} is vacuous")
    reach = domain if reach is None else reach
    for sub in _subparts(pred):
        if sub.op == "=>":
            ante = compile_pred(m, sub.left, params)
            if not any(ante(v, b) for v, b in reach):
                findings.append(f"{where}: antecedent {show_pred(sub.left)} is never true")
        else:
            for d in disjuncts(sub):
                fn = compile_pred(m, d, params)
                if not any(fn(v, b) for v, b in reach):
                    findings.append(f"{where}: disjunct {show_pred(d)} is never true")
    return list(dict.fromkeys(findings))


def vacuous_parts(session: ValidationSession, scope: str) -> Verdict:
    m = session.machine
    try:
        session.explore()
    except LimitExceeded as e:
        return Verdict(ERROR, str(e))
    states = [s.values for s in session.space.states]
    findings: list[str] = []
    if scope == "INV":
        domain = [(s.values, ()) for s in all_typed_states(m)]
        findings = find_vacuous(m, m.invariant, domain, {}, "INVARIANT",
                                reach=[(v, ()) for v in states])
    elif scope == "GRD":
        for op in m.operations:
            bindings = list(itertools.product(*(m.set_elements(t) for _, t in op.params)))
            domain = [(v, b) for v in states for b in bindings]
            findings += find_vacuous(m, op.guard, domain, dict(op.params), op.name)
    else:
        return Verdict(ERROR, f"unknown vacuity scope {scope}")
    if findings:
        return Verdict(FAIL, f"{len(findings)} vacuous part(s)", findings=findings)
    return Verdict(SUCCESS, "no vacuous parts")
