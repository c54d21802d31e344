"""Trace replay and the line-oriented trace file format."""

from __future__ import annotations

from ..errors import ModelError, SyntaxError_
from ..lexer import TokenStream
from ..model.ast import show_pred
from ..model.machine import ROOT, compile_pred, initial_states
from ..model.parser import parse_pred
from ..space import Path, Trace, TraceStep, ValidationSession
from .verdict import ERROR, FAIL, SUCCESS, Verdict

INIT_OP = "INITIALISATION"


class StepNotEnabled(Exception):
    def __init__(self, index: int, step: TraceStep):
        super().__init__(f"step {index} ({show_step(step)}) is not enabled")
        self.index = index


class PostconditionFailed(Exception):
    def __init__(self, index: int, step: TraceStep):
        super().__init__(f"postcondition of step {index} ({show_step(step)}) does not hold")
        self.index = index


def show_step(step: TraceStep) -> str:
    if not step.binding:
        return step.op
    args = ",".join(f"{n}={v}" if n else str(v) for n, v in step.binding)
    return f"{step.op}({args})"


def _matches(label, step: TraceStep) -> bool:
    if label.op != step.op:
        return False
    if not step.binding:
        return True
    if len(step.binding) != len(label.args):
        return False
    if all(n is not None for n, _ in step.binding):
        have = {n: str(v) for n, v in label.args}
        return all(have.get(n) == str(v) for n, v in step.binding)
    return all(str(w) == str(v) for (_, w), (_, v) in zip(step.binding, label.args))


def _start_node(session: ValidationSession, trace: Trace):
    starts_with_init = bool(trace.steps) and trace.steps[0].op == INIT_OP
    if trace.origin == "root" or starts_with_init:
        return ROOT
    if trace.origin == "current":
        cur = session.current_trace
        if cur is not None and cur.last is not ROOT:
            return cur.last
        return ROOT
    return trace.origin


def replay_trace(session: ValidationSession, trace: Trace) -> Verdict:
    """Replay ``trace`` step by step, checking each optional postcondition.

    When the trace starts at the root without an explicit INITIALISATION
    step, the (first) initialisation is taken implicitly.
    """
    m = session.machine
    space = session.space
    node = _start_node(session, trace)
    path = Path(node, [])
    steps = list(trace.steps)
    if node is ROOT and (not steps or steps[0].op != INIT_OP):
        inits = initial_states(m)
        if not inits:
            return Verdict(FAIL, "no initial state")
        path.steps.append((space.successors_of(ROOT)[0][0], inits[0]))
        node = inits[0]
    try:
        posts = [compile_pred(m, st.post, {}) if st.post is not None else None for st in steps]
    except ModelError as e:
        return Verdict(ERROR, str(e))
    try:
        for i, (step, post) in enumerate(zip(steps, posts), 1):
            cands = [(lab, dst) for lab, dst in space.successors_of(node) if _matches(lab, step)]
            if not cands:
                raise StepNotEnabled(i, step)
            chosen = None
            for lab, dst in cands:
                if post is None or post(dst.values, ()):
                    chosen = (lab, dst)
                    break
            if chosen is None:
                path.steps.append(cands[0])
                raise PostconditionFailed(i, step)
            path.steps.append(chosen)
            node = chosen[1]
    except (StepNotEnabled, PostconditionFailed) as e:
        session.record(path)
        v = Verdict(FAIL, str(e), trace=path)
        v.findings = [f"failed at step {e.index}"]
        return v
    session.record(path)
    return Verdict(SUCCESS, f"replayed {len(steps)} steps", trace=path)


# ---------------------------------------------------------------- trace files

def parse_step(ts: TokenStream, angle: bool = False, allow_brace_close: bool = False) -> TraceStep:
    """``op``, ``op(v, ...)`` or ``op(p=v, ...)`` optionally followed by ``<pred>``."""
    op = ts.expect_id().value
    binding = []
    if ts.accept_op("("):
        while not ts.accept_op(")"):
            if binding:
                ts.expect_op(",")
            name = None
            if ts.peek().kind == "id" and ts.peek(1).is_op("="):
                name = ts.next().value
                ts.next()
            t = ts.next()
            if t.kind == "num":
                value = int(t.value)
            elif t.kind in ("id", "str"):
                value = t.value
            elif t.is_op("-") and ts.peek().kind == "num":
                value = -int(ts.next().value)
            else:
                ts.fail("expected a parameter value", t)
            binding.append((name, value))
    post = None
    if angle and ts.peek().is_op("<", "⟨"):
        opener = ts.next().value
        post = parse_pred(ts, angle=True)
        if allow_brace_close:
            closers = (">", "⟩", "}")
        else:
            closers = (">",) if opener == "<" else ("⟩",)
        ts.expect_op(*closers)
    return TraceStep(op, tuple(binding), post)


def parse_trace_file(text: str) -> Trace:
    """One step per line: ``op(param=val,...) [assert <pred>]``."""
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        ts = TokenStream.of(line)
        try:
            step = parse_step(ts)
            if ts.accept_id("assert"):
                step = TraceStep(step.op, step.binding, parse_pred(ts))
            ts.expect_end()
        except SyntaxError_ as e:
            raise SyntaxError_(f"trace line {lineno}: {e}", lineno, e.column) from None
        steps.append(step)
    return Trace(steps, origin="root")


def format_trace(steps) -> str:
    """Render TraceSteps (or a Path's steps) in trace file format."""
    lines = []
    for st in steps:
        if not isinstance(st, TraceStep):
            label = st[0]
            if label.op == INIT_OP:
                continue
            st = TraceStep(label.op, tuple(label.args))
        line = show_step(st)
        if st.post is not None:
            line += f" assert {show_pred(st.post)}"
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")
