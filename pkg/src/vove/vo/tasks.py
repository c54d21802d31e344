"""Validation task declarations: ``ID/Context/TECHNIQUE: parameters``."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..check.ctl import parse_ctl, show_ctl
from ..check.explicit import KINDS as MC_KINDS, McConfig
from ..check.ltl import parse_ltl, show_ltl
from ..check.replay import parse_step, show_step
from ..errors import ArityMismatch, SyntaxError_, UnknownTechnique, UnresolvedContext
from ..lexer import TokenStream
from ..model.ast import Name, show_expr, show_pred
from ..model.parser import parse_expr, parse_pred
from ..query import decimal_text, parse_query, show_query
from ..sim.engine import Condition
from ..sim.stats import PROCEDURES, PROPERTIES, Hypothesis
from ..space import TraceStep

TECHNIQUES = ("TR", "HT", "EOP", "OC", "MCDC", "MC", "LTL", "CTL", "SVIS", "SPRJ",
              "STAT", "SISTAT", "ED", "OCT", "RWM", "VCT", "MMV", "VAP")
UNSUPPORTED = ("PO", "SMC", "PSMC")
SIMULATION = ("HT", "EOP", "SISTAT")
INSPECTION = ("STAT", "SVIS", "OCT", "VCT", "MMV")
NEEDS_COMPLETE = ("SPRJ", "ED", "VAP")
QUERY_TECHNIQUES = ("SVIS", "STAT", "ED", "OCT", "RWM", "VCT", "MMV")

_HEADER = re.compile(r"^\s*(?P<id>[A-Za-z][\w.\-]*)\s*/\s*(?P<ctx>[^/:]+?)\s*/\s*"
                     r"(?P<tech>[A-Za-z]+)\s*:(?P<params>.*)$", re.S)


# ------------------------------------------------------------ parameter types

@dataclass(frozen=True)
class TrParams:
    steps: tuple


@dataclass(frozen=True)
class TemporalParams:
    formula: tuple
    expected: str


@dataclass(frozen=True)
class OcParams:
    ops: tuple


@dataclass(frozen=True)
class QueryParams:
    query: object


@dataclass(frozen=True)
class SprjParams:
    expr: object
    query: object

    @property
    def name(self) -> str:
        return self.expr.name if isinstance(self.expr, Name) else ""


@dataclass(frozen=True)
class HtParams:
    runs: int | None
    hypothesis: Hypothesis
    alpha: Fraction


@dataclass(frozen=True)
class EopParams:
    runs: int | None
    hypothesis: Hypothesis  # p0 is the desired probability
    delta: Fraction


@dataclass(frozen=True)
class SistatParams:
    runs: int | None
    start: Condition
    end: Condition
    query: object


@dataclass(frozen=True)
class Unsupported:
    text: str


@dataclass(frozen=True)
class VtDecl:
    id: str
    context: tuple
    technique: str
    params: object
    line: int = field(default=0, compare=False)

    @property
    def supported(self) -> bool:
        return self.technique not in UNSUPPORTED

    @property
    def machine(self) -> str:
        return self.context[0]

    @property
    def sim(self) -> str | None:
        return self.context[1] if len(self.context) > 1 else None


# -------------------------------------------------------------------- parsing

class ParamParser:
    """Parameter parser for one technique."""

    def __init__(self, tech: str, text: str, line: int):
        self.tech = tech
        self.ts = TokenStream.of(text)
        self.line = line

    def need(self, what: str) -> None:
        if self.ts.at_end():
            raise ArityMismatch(f"{self.tech}: missing {what}")

    def comma(self, what: str) -> None:
        self.need(what)
        if self.ts.peek().is_op(">", "⟩", ")", "]"):
            raise ArityMismatch(f"{self.tech}: missing {what}")
        self.ts.expect_op(",")
        self.need(what)

    def done(self) -> None:
        if self.ts.peek().is_op(","):
            raise ArityMismatch(f"{self.tech}: too many parameters")
        self.ts.expect_end()

    def number(self) -> Fraction:
        t = self.ts.next()
        if t.kind != "num":
            self.ts.fail("expected a number", t)
        return Fraction(t.value)

    def integer(self) -> int:
        t = self.ts.next()
        if t.kind != "num" or "." in t.value:
            self.ts.fail("expected an integer", t)
        return int(t.value)

    def word(self, choices) -> str:
        t = self.ts.next()
        if t.kind != "id" or t.value not in choices:
            self.ts.fail(f"expected one of {', '.join(choices)}", t)
        return t.value

    def open_angle(self) -> str:
        t = self.ts.expect_op("<", "⟨")
        return ">" if t.value == "<" else "⟩"

    def condition(self) -> Condition:
        close = self.open_angle()
        kind = self.word(("PRED", "TIME", "STEPS"))
        self.comma(f"{kind} value")
        value = parse_pred(self.ts, angle=True) if kind == "PRED" else self.integer()
        self.ts.expect_op(close)
        return Condition(kind, value)

    def prop(self) -> tuple:
        close = self.open_angle()
        kind = self.word(PROPERTIES)
        self.comma("property predicate")
        pred = parse_pred(self.ts, angle=True)
        self.ts.expect_op(close)
        return (kind, pred)

    def optional_runs(self) -> int | None:
        if self.ts.peek().kind == "num" and self.ts.peek(1).is_op(","):
            n = self.integer()
            self.ts.next()
            return n
        return None

    def hypothesis(self) -> Hypothesis:
        self.need("hypothesis")
        self.ts.expect_op("(")
        start = self.condition()
        self.comma("end condition")
        end = self.condition()
        self.comma("property")
        prop = self.prop()
        self.comma("procedure")
        procedure = self.word(PROCEDURES)
        self.comma("probability")
        p0 = self.number()
        if self.ts.peek().is_op(","):
            raise ArityMismatch(f"{self.tech}: too many hypothesis components")
        self.ts.expect_op(")")
        return Hypothesis(start, end, prop, procedure, p0)


def _parse_params(tech: str, text: str, line: int):
    if tech in UNSUPPORTED:
        return Unsupported(" ".join(text.split()))
    p = ParamParser(tech, text, line)
    ts = p.ts
    p.need("parameters")
    if tech == "TR":
        ts.expect_op("[")
        steps = []
        while True:
            steps.append(parse_step(ts, angle=True, allow_brace_close=True))
            if not ts.accept_op(","):
                break
        ts.expect_op("]")
        p.done()
        return TrParams(tuple(steps))
    if tech == "MC":
        close = p.open_angle()
        kind = p.word(MC_KINDS)
        pred = None
        if kind in ("INV", "GOAL"):
            p.comma(f"{kind} predicate")
            pred = parse_pred(ts, angle=True)
        ts.expect_op(close)
        p.done()
        return McConfig(kind, pred)
    if tech in ("LTL", "CTL"):
        f = parse_ltl(ts) if tech == "LTL" else parse_ctl(ts)
        p.comma("expected result")
        expected = p.word(("SUCCESS", "FAIL"))
        p.done()
        return TemporalParams(f, expected)
    if tech == "OC":
        ts.expect_op("[")
        ops = [ts.expect_id().value]
        while ts.accept_op(","):
            ops.append(ts.expect_id().value)
        ts.expect_op("]")
        p.done()
        return OcParams(tuple(ops))
    if tech == "MCDC":
        level = p.integer()
        p.done()
        return level
    if tech == "VAP":
        scope = p.word(("INV", "GRD"))
        p.done()
        return scope
    if tech in QUERY_TECHNIQUES:
        q = parse_query(ts)
        ts.accept_op(".")  # a closing full stop is tolerated
        p.done()
        return QueryParams(q)
    if tech == "SPRJ":
        expr = parse_expr(ts)
        p.comma("projection formula")
        q = parse_query(ts)
        ts.accept_op(".")
        p.done()
        return SprjParams(expr, q)
    if tech == "HT":
        runs = p.optional_runs()
        h = p.hypothesis()
        p.comma("significance level")
        alpha = p.number()
        p.done()
        return HtParams(runs, h, alpha)
    if tech == "EOP":
        runs = p.optional_runs()
        h = p.hypothesis()
        p.comma("delta")
        delta = p.number()
        p.done()
        return EopParams(runs, h, delta)
    if tech == "SISTAT":
        runs = p.optional_runs()
        start = p.condition()
        p.comma("end condition")
        end = p.condition()
        p.comma("statistics formula")
        q = parse_query(ts)
        p.done()
        return SistatParams(runs, start, end, q)
    raise UnknownTechnique(f"unknown technique {tech}")


def parse_vt(line: str, artifacts: dict | None = None, lineno: int = 0) -> VtDecl:
    """Parse one task declaration.

    ``artifacts`` maps loaded artifact names to ``"machine"`` or ``"sim"``;
    when given, the context is resolved against it.
    """
    m = _HEADER.match(line)
    if not m:
        raise SyntaxError_("expected ID/Context/TECHNIQUE: parameters", lineno, 1)
    tech = m.group("tech")
    if tech not in TECHNIQUES and tech not in UNSUPPORTED:
        raise UnknownTechnique(f"{m.group('id')}: unknown technique {tech}")
    context = tuple(c.strip() for c in m.group("ctx").split(","))
    want = 2 if tech in SIMULATION else 1
    if tech not in UNSUPPORTED and len(context) != want:
        raise ArityMismatch(f"{m.group('id')}: {tech} takes {want} context artifact(s), "
                            f"got {len(context)}")
    if artifacts is not None and tech not in UNSUPPORTED:
        kinds = ("machine", "sim")
        for name, kind in zip(context, kinds):
            if artifacts.get(name) != kind:
                what = "unknown artifact" if name not in artifacts else f"not a {kind}"
                raise UnresolvedContext(f"{m.group('id')}: {what}: {name}")
    try:
        params = _parse_params(tech, m.group("params"), lineno)
    except SyntaxError_ as e:
        msg = f"{m.group('id')}: {e.diagnostics[0].message}"
        raise SyntaxError_(msg, lineno + e.line - 1, e.column) from None
    return VtDecl(m.group("id"), context, tech, params, lineno)


# ------------------------------------------------------------------- printing

def _num(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    text = decimal_text(v)
    return text if text is not None else str(float(v))


def _cond(c: Condition) -> str:
    value = show_pred(c.value) if c.kind == "PRED" else str(c.value)
    return f"<{c.kind}, {value}>"


def _hyp(h: Hypothesis) -> str:
    return (f"({_cond(h.start)}, {_cond(h.end)}, <{h.prop[0]}, {show_pred(h.prop[1])}>, "
            f"{h.procedure}, {_num(h.p0)})")


def _step(st: TraceStep) -> str:
    s = show_step(st)
    return s if st.post is None else f"{s} <{show_pred(st.post)}>"


def show_params(vt: VtDecl) -> str:
    p = vt.params
    t = vt.technique
    if isinstance(p, Unsupported):
        return p.text
    if t == "TR":
        return "[" + ", ".join(_step(s) for s in p.steps) + "]"
    if t == "MC":
        return f"<{p.kind}>" if p.pred is None else f"<{p.kind}, {show_pred(p.pred)}>"
    if t == "LTL":
        return f"{show_ltl(p.formula)}, {p.expected}"
    if t == "CTL":
        return f"{show_ctl(p.formula)}, {p.expected}"
    if t == "OC":
        return "[" + ", ".join(p.ops) + "]"
    if t in ("MCDC", "VAP"):
        return str(p)
    if t in QUERY_TECHNIQUES:
        return show_query(p.query)
    if t == "SPRJ":
        return f"{show_expr(p.expr)}, {show_query(p.query)}"
    runs = f"{p.runs}, " if p.runs is not None else ""
    if t == "HT":
        return f"{runs}{_hyp(p.hypothesis)}, {_num(p.alpha)}"
    if t == "EOP":
        return f"{runs}{_hyp(p.hypothesis)}, {_num(p.delta)}"
    if t == "SISTAT":
        return f"{runs}{_cond(p.start)}, {_cond(p.end)}, {show_query(p.query)}"
    raise UnknownTechnique(t)


def print_vt(vt: VtDecl) -> str:
    return f"{vt.id}/{', '.join(vt.context)}/{vt.technique}: {show_params(vt)}"
