"""LTL with past operators over explored state spaces.

Past subformulas (Y, H, O, S) are evaluated by a deterministic monitor whose
bit vector is carried in augmented states; what remains is a future-time
formula checked by product emptiness with a tableau automaton.
"""

from __future__ import annotations

from collections import deque

from ..errors import LimitExceeded, ModelError, SemanticsError
from ..lexer import TokenStream
from ..model.machine import INIT, ROOT, Label, compile_pred
from ..model.ast import show_pred
from ..model.parser import parse_pred
from ..space import Path, ValidationSession
from .buchi import build_automaton, nnf
from .verdict import ERROR, Verdict, expect

UNARY_LTL = "GFXHOY"
BINARY_LTL = ("U", "W", "R", "S")
PAST = ("Y", "H", "O", "S")
FUTURE = ("X", "F", "G", "U", "W", "R")
STUTTER = Label("(deadlock)")


# --------------------------------------------------------------------- parser

class _LtlParser:
    def __init__(self, ts: TokenStream, unary: str, binary: tuple):
        self.ts = ts
        self.unary = unary
        self.binary = binary

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
        left = self.binop()
        while self.ts.accept_op("&"):
            left = ("and", left, self.binop())
        return left

    def binop(self):
        left = self.unop()
        t = self.ts.peek()
        if t.kind == "id" and t.value in self.binary:
            self.ts.next()
            return (t.value, left, self.binop())
        return left

    def _unary_prefix(self, t) -> list[str] | None:
        if t.kind != "id" or not t.value or any(c not in self.unary for c in t.value):
            return None
        return list(t.value)

    def unop(self):
        if self._kw("not"):
            return ("not", self.unop())
        ops = self._unary_prefix(self.ts.peek())
        if ops:
            self.ts.next()
            inner = self.unop()
            for op in reversed(ops):
                inner = (op, inner)
            return inner
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
        ts.fail("expected an LTL formula")


def parse_ltl(src) -> tuple:
    if isinstance(src, str):
        ts = TokenStream.of(src)
        f = _LtlParser(ts, UNARY_LTL, BINARY_LTL).formula()
        ts.expect_end()
        return f
    return _LtlParser(src, UNARY_LTL, BINARY_LTL).formula()


# ----------------------------------------------------------------- past part

def _children(f):
    if f[0] in ("ap", "true", "false", "bit"):
        return ()
    return f[1:]


def _has(f, ops) -> bool:
    return f[0] in ops or any(_has(c, ops) for c in _children(f))


class PastMonitor:
    """Deterministic monitor for the pure-past subformulas of a formula."""

    def __init__(self):
        self.slots: list = []
        self.index: dict = {}

    def slot(self, f) -> int:
        if f in self.index:
            return self.index[f]
        for c in _children(f):
            self.slot(c)
        self.index[f] = len(self.slots)
        self.slots.append(f)
        return self.index[f]

    def compile(self, machine) -> None:
        self.preds = {i: compile_pred(machine, f[1], {})
                      for i, f in enumerate(self.slots) if f[0] == "ap"}

    def bits(self, values, prev) -> tuple:
        """Truth of every slot at the current position (``prev`` is None at the start)."""
        cur: list = []
        first = prev is None
        idx = self.index
        for i, f in enumerate(self.slots):
            op = f[0]
            if op == "ap":
                v = bool(self.preds[i](values, ()))
            elif op == "true":
                v = True
            elif op == "false":
                v = False
            elif op == "not":
                v = not cur[idx[f[1]]]
            elif op == "and":
                v = cur[idx[f[1]]] and cur[idx[f[2]]]
            elif op == "or":
                v = cur[idx[f[1]]] or cur[idx[f[2]]]
            elif op == "implies":
                v = (not cur[idx[f[1]]]) or cur[idx[f[2]]]
            elif op == "iff":
                v = cur[idx[f[1]]] == cur[idx[f[2]]]
            elif op == "Y":
                v = (not first) and prev[idx[f[1]]]
            elif op == "H":
                v = cur[idx[f[1]]] and (first or prev[i])
            elif op == "O":
                v = cur[idx[f[1]]] or ((not first) and prev[i])
            elif op == "S":
                v = cur[idx[f[2]]] or (cur[idx[f[1]]] and (not first) and prev[i])
            else:
                raise SemanticsError(f"unexpected operator {op} in past formula")
            cur.append(v)
        return tuple(cur)


def split_past(f, monitor: PastMonitor):
    """Replace every past-operator subtree by a monitor bit."""
    op = f[0]
    if op in PAST:
        if _has(f, FUTURE):
            raise SemanticsError("future operators below past operators are not supported")
        return ("bit", monitor.slot(f))
    if op in ("ap", "true", "false"):
        return f
    return (op,) + tuple(split_past(c, monitor) for c in f[1:])


# ------------------------------------------------------------------ checking

class Kripke:
    """Augmented states (state, monitor bits) of an explored space."""

    def __init__(self, session: ValidationSession, monitor: PastMonitor):
        self.space = session.space
        self.monitor = monitor
        self.initial = [(s, monitor.bits(s.values, None))
                        for _lab, s in self.space.successors_of(ROOT)]

    def successors(self, k):
        s, bits = k
        out = self.space.out.get(s) or [(STUTTER, s)]
        return [(lab, (t, self.monitor.bits(t.values, bits))) for lab, t in out]


def _literal_holds(lit, k, preds) -> bool:
    if lit[0] == "true":
        return True
    if lit[0] == "false":
        return False
    if lit[0] == "not":
        return not _literal_holds(lit[1], k, preds)
    if lit[0] == "bit":
        return k[1][lit[1]]
    return bool(preds[lit](k[0].values, ()))


def find_counterexample(session: ValidationSession, f):
    """None if ``f`` holds on all paths, else a lasso (prefix, loop) of (label, state)."""
    monitor = PastMonitor()
    fut = split_past(f, monitor)
    monitor.compile(session.machine)
    neg = nnf(fut, neg=True)
    aut = build_automaton(neg)
    preds = {}
    for lits in aut.labels.values():
        for lit in lits:
            atom = lit[1] if lit[0] == "not" else lit
            if atom[0] == "ap" and atom not in preds:
                preds[atom] = compile_pred(session.machine, atom[1], {})
    kripke = Kripke(session, monitor)

    def ok(k, q) -> bool:
        return all(_literal_holds(lit, k, preds) for lit in aut.labels[q])

    # reachable product graph
    init = [(k, q) for k in kripke.initial for q in aut.initial if ok(k, q)]
    parent: dict = {n: None for n in init}
    succ: dict = {}
    queue = deque(init)
    while queue:
        node = queue.popleft()
        k, q = node
        out = []
        for lab, k2 in kripke.successors(k):
            for q2 in aut.succ[q]:
                if ok(k2, q2):
                    n2 = (k2, q2)
                    out.append((lab, n2))
                    if n2 not in parent:
                        parent[n2] = (node, lab)
                        queue.append(n2)
        succ[node] = out

    for comp in _sccs(list(parent), succ):
        members = set(comp)
        if len(comp) == 1 and not any(n2 == comp[0] for _, n2 in succ[comp[0]]):
            continue
        if not all(any(n[1] in acc for n in comp) for acc in aut.accepting):
            continue
        entry = min(comp, key=lambda n: _depth(n, parent))
        prefix = _unwind(entry, parent)
        loop = _cycle(entry, members, succ, aut.accepting)
        return prefix, loop
    return None


def _depth(n, parent) -> int:
    d = 0
    while parent[n] is not None:
        n = parent[n][0]
        d += 1
    return d


def _unwind(n, parent) -> list:
    steps = []
    while parent[n] is not None:
        prev, lab = parent[n]
        steps.append((lab, n))
        n = prev
    steps.append((INIT, n))
    steps.reverse()
    return steps


def _bfs_within(src, goal, members, succ) -> list:
    par = {src: None}
    queue = deque([src])
    while queue:
        n = queue.popleft()
        for lab, n2 in succ[n]:
            if n2 not in members:
                continue
            if goal(n2):
                # the goal may be ``src`` itself, reached through a cycle
                path = [(lab, n2)]
                while par[n] is not None:
                    p, lb = par[n]
                    path.append((lb, n))
                    n = p
                return path[::-1]
            if n2 in par:
                continue
            par[n2] = (n, lab)
            queue.append(n2)
    raise SemanticsError("internal: no path inside a strongly connected component")


def _cycle(entry, members, succ, accepting) -> list:
    loop = []
    cur = entry
    for acc in accepting:
        if cur[1] in acc and loop:
            continue
        seg = _bfs_within(cur, lambda n, a=acc: n[1] in a, members, succ)
        loop += seg
        cur = seg[-1][1]
    loop += _bfs_within(cur, lambda n: n == entry, members, succ)
    return loop


def _sccs(nodes, succ) -> list:
    """Tarjan's algorithm, iterative; components in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, i = work[-1]
            edges = succ[node]
            if i < len(edges):
                work[-1] = (node, i + 1)
                nxt = edges[i][1]
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, 0))
                elif nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            else:
                work.pop()
                if work:
                    parent_node = work[-1][0]
                    low[parent_node] = min(low[parent_node], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        n = stack.pop()
                        on_stack.discard(n)
                        comp.append(n)
                        if n == node:
                            break
                    out.append(comp)
    return out


def lasso_path(prefix, loop) -> tuple[Path, int]:
    """Concrete path of a lasso and the step index where the loop starts."""
    steps = [(lab, n[0][0]) for lab, n in prefix] + [(lab, n[0][0]) for lab, n in loop]
    return Path(ROOT, steps), len(prefix)


def check_ltl(session: ValidationSession, f, expected: str) -> Verdict:
    try:
        session.explore()
    except LimitExceeded as e:
        return Verdict(ERROR, str(e))
    try:
        cex = find_counterexample(session, f)
    except (ModelError, SemanticsError) as e:
        return Verdict(ERROR, str(e))
    holds = cex is None
    status = expect(holds, expected)
    if holds:
        return Verdict(status, "formula holds")
    path, loop_at = lasso_path(*cex)
    return Verdict(status, f"counterexample lasso, loop back to step {loop_at}", trace=path)


def show_ltl(f) -> str:
    """Fully parenthesised rendering accepted by ``parse_ltl``."""
    op = f[0]
    if op == "ap":
        return "{" + show_pred(f[1]) + "}"
    if op in ("true", "false"):
        return op
    if op == "not":
        return f"not ({show_ltl(f[1])})"
    if op in _INFIX:
        return f"({show_ltl(f[1])} {_INFIX[op]} {show_ltl(f[2])})"
    if op in BINARY_LTL:
        return f"({show_ltl(f[1])} {op} {show_ltl(f[2])})"
    return f"{op} ({show_ltl(f[1])})"


_INFIX = {"and": "&", "or": "or", "implies": "=>", "iff": "<=>"}
