"""CTL model checking by fixpoint labelling of the explored state graph."""

from __future__ import annotations

from ..errors import LimitExceeded, ModelError, SemanticsError
from ..lexer import TokenStream
from ..model.machine import ROOT, compile_pred
from ..model.ast import show_pred
from ..model.parser import parse_pred
from ..space import ValidationSession
from .verdict import ERROR, Verdict, expect

CTL_UNARY = ("EX", "AX", "EF", "AF", "EG", "AG")


class _CtlParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    def _kw(self, word) -> bool:
        t = self.ts.peek()
        if t.kind in ("op", "id") and t.value == word:
            self.ts.next()
            return True
        return False

    def formula(self):
        left = self.impl()
        while self.ts.accept_op("<=>"):
            left = ("iff", left, self.impl())
        return left

    def impl(self):
        left = self.disj()
        while self.ts.accept_op("=>"):
            left = ("implies", left, self.disj())
        return left

    def disj(self):
        left = self.conj()
        while self._kw("or"):
            left = ("or", left, self.conj())
        return left

    def conj(self):
        left = self.unop()
        while self.ts.accept_op("&"):
            left = ("and", left, self.unop())
        return left

    def unop(self):
        ts = self.ts
        if self._kw("not"):
            return ("not", self.unop())
        t = ts.peek()
        if t.kind == "id" and len(t.value) >= 2 and len(t.value) % 2 == 0:
            ops = [t.value[i:i + 2] for i in range(0, len(t.value), 2)]
            if all(o in CTL_UNARY for o in ops):
                ts.next()
                inner = self.unop()
                for o in reversed(ops):
                    inner = (o, inner)
                return inner
        if t.kind == "id" and t.value in ("E", "A") and ts.peek(1).is_op("[", "("):
            ts.next()
            close = "]" if ts.next().value == "[" else ")"
            a = self.formula()
            ts.expect_id("U")
            b = self.formula()
            ts.expect_op(close)
            return (t.value + "U", a, b)
        return self.primary()

    def primary(self):
        ts = self.ts
        if ts.accept_op("{"):
            p = parse_pred(ts)
            ts.expect_op("}")
            return ("ap", p)
        if ts.accept_op("("):
            f = self.formula()
            ts.expect_op(")")
            return f
        if ts.accept_id("true", "TRUE"):
            return ("true",)
        if ts.accept_id("false", "FALSE"):
            return ("false",)
        ts.fail("expected a CTL formula")


def parse_ctl(src) -> tuple:
    if isinstance(src, str):
        ts = TokenStream.of(src)
        f = _CtlParser(ts).formula()
        ts.expect_end()
        return f
    return _CtlParser(src).formula()


class _Graph:
    def __init__(self, space):
        self.states = space.states
        self.succ = {s: [t for _, t in space.out.get(s, ())] or [s] for s in self.states}
        self.pred: dict = {s: [] for s in self.states}
        for s, ts in self.succ.items():
            for t in ts:
                self.pred[t].append(s)


def label(graph: _Graph, f, machine) -> set:
    """The set of states satisfying ``f``."""
    op = f[0]
    S = graph.states
    if op == "true":
        return set(S)
    if op == "false":
        return set()
    if op == "ap":
        fn = compile_pred(machine, f[1], {})
        return {s for s in S if fn(s.values, ())}
    if op == "not":
        return set(S) - label(graph, f[1], machine)
    if op in ("and", "or", "implies", "iff"):
        a, b = label(graph, f[1], machine), label(graph, f[2], machine)
        if op == "and":
            return a & b
        if op == "or":
            return a | b
        if op == "implies":
            return (set(S) - a) | b
        return {s for s in S if (s in a) == (s in b)}
    if op == "EX":
        a = label(graph, f[1], machine)
        return {s for s in S if any(t in a for t in graph.succ[s])}
    if op == "AX":
        a = label(graph, f[1], machine)
        return {s for s in S if all(t in a for t in graph.succ[s])}
    if op in ("EF", "EU"):
        a = set(S) if op == "EF" else label(graph, f[1], machine)
        b = label(graph, f[-1], machine)
        return _lfp_exists(graph, a, b)
    if op in ("AF", "AU"):
        a = set(S) if op == "AF" else label(graph, f[1], machine)
        b = label(graph, f[-1], machine)
        return _lfp_all(graph, a, b)
    if op == "EG":
        return _gfp(graph, label(graph, f[1], machine), any)
    if op == "AG":
        return _gfp(graph, label(graph, f[1], machine), all)
    raise SemanticsError(f"unknown CTL operator {op}")


def _lfp_exists(graph, a, b) -> set:
    z = set(b)
    work = list(z)
    while work:
        t = work.pop()
        for s in graph.pred[t]:
            if s not in z and s in a:
                z.add(s)
                work.append(s)
    return z


def _lfp_all(graph, a, b) -> set:
    z = set(b)
    changed = True
    while changed:
        changed = False
        for s in graph.states:
            if s not in z and s in a and all(t in z for t in graph.succ[s]):
                z.add(s)
                changed = True
    return z


def _gfp(graph, a, quant) -> set:
    z = set(a)
    changed = True
    while changed:
        changed = False
        for s in list(z):
            if not quant(t in z for t in graph.succ[s]):
                z.discard(s)
                changed = True
    return z


def ctl_holds(session: ValidationSession, f) -> tuple[bool, list]:
    graph = _Graph(session.space)
    sat = label(graph, f, session.machine)
    bad = [s for _, s in session.space.successors_of(ROOT) if s not in sat]
    return not bad, bad


def check_ctl(session: ValidationSession, f, expected: str) -> Verdict:
    try:
        session.explore()
    except LimitExceeded as e:
        return Verdict(ERROR, str(e))
    try:
        holds, bad = ctl_holds(session, f)
    except (ModelError, SemanticsError) as e:
        return Verdict(ERROR, str(e))
    msg = "formula holds" if holds else f"fails in initial state {bad[0].show()}"
    return Verdict(expect(holds, expected), msg)


_INFIX = {"and": "&", "or": "or", "implies": "=>", "iff": "<=>"}


def show_ctl(f) -> str:
    """Fully parenthesised rendering accepted by ``parse_ctl``."""
    op = f[0]
    if op == "ap":
        return "{" + show_pred(f[1]) + "}"
    if op in ("true", "false"):
        return op
    if op == "not":
        return f"not ({show_ctl(f[1])})"
    if op in _INFIX:
        return f"({show_ctl(f[1])} {_INFIX[op]} {show_ctl(f[2])})"
    if op in ("EU", "AU"):
        return f"{op[0]}[{show_ctl(f[1])} U {show_ctl(f[2])}]"
    return f"{op} ({show_ctl(f[1])})"
