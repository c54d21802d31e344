"""Recursive-descent parser for the machine language and its predicates."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SyntaxError_
from ..lexer import TokenStream
from .ast import (Arith, BinPred, BoolLit, Compare, Member, Name, Neg, Not, Num,
                  Range, SetLit)

RELOPS = ("=", "/=", "<", "<=", ">", ">=", ":", "/:")

CLAUSES = ("SETS", "VARIABLES", "ABSTRACT_VARIABLES", "CONCRETE_VARIABLES",
           "INVARIANT", "INITIALISATION", "OPERATIONS", "END", "REFINES")

KEYWORDS = frozenset(CLAUSES) | {
    "or", "not", "true", "false", "btrue", "bfalse", "TRUE", "FALSE",
    "SELECT", "THEN", "BEGIN", "skip", "CHOICE", "OR", "MACHINE", "REFINEMENT",
}


def _is_kw(tok, word: str) -> bool:
    # "or"/"not" arrive as ops when spelt with symbols, as ids when spelt in words
    return (tok.kind == "op" or tok.kind == "id") and tok.value == word


# ---------------------------------------------------------------- expressions

def parse_expr(ts: TokenStream):
    left = _unary(ts)
    while ts.peek().is_op("+", "-"):
        op = ts.next().value
        left = Arith(op, left, _unary(ts))
    return left


def _unary(ts: TokenStream):
    if ts.accept_op("-"):
        if ts.peek().kind == "num" and "." not in ts.peek().value:
            return Num(-int(ts.next().value))
        return Neg(_unary(ts))
    return _primary(ts)


def _primary(ts: TokenStream):
    t = ts.peek()
    if t.kind == "num":
        if "." in t.value:
            ts.fail("decimal literals are not supported in models")
        ts.next()
        return Num(int(t.value))
    if t.kind == "id" and t.value not in KEYWORDS:
        ts.next()
        return Name(t.value)
    if ts.accept_op("("):
        e = parse_expr(ts)
        ts.expect_op(")")
        return e
    ts.fail("expected expression")


def _collection(ts: TokenStream):
    if ts.accept_op("{"):
        items = []
        if not ts.peek().is_op("}"):
            items.append(parse_expr(ts))
            while ts.accept_op(","):
                items.append(parse_expr(ts))
        ts.expect_op("}")
        return SetLit(tuple(items))
    lo = parse_expr(ts)
    if ts.accept_op(".."):
        return Range(lo, parse_expr(ts))
    if isinstance(lo, Name):
        return lo
    ts.fail("expected a set, a set name or a range")


# ----------------------------------------------------------------- predicates

def parse_pred(ts: TokenStream, angle: bool = False):
    """Parse a predicate.

    With ``angle=True`` a bare ``>`` ends the predicate instead of being a
    comparison, so ``<INV, x = 1>`` style brackets can wrap predicates.
    """
    return _iff(ts, angle)


def _iff(ts, angle):
    left = _impl(ts, angle)
    while ts.accept_op("<=>"):
        left = BinPred("<=>", left, _impl(ts, angle))
    return left


def _impl(ts, angle):
    left = _disj(ts, angle)
    while ts.accept_op("=>"):
        left = BinPred("=>", left, _disj(ts, angle))
    return left


def _disj(ts, angle):
    left = _conj(ts, angle)
    while _is_kw(ts.peek(), "or"):
        ts.next()
        left = BinPred("or", left, _conj(ts, angle))
    return left


def _conj(ts, angle):
    left = _neg(ts, angle)
    while ts.accept_op("&"):
        left = BinPred("&", left, _neg(ts, angle))
    return left


def _neg(ts, angle):
    if _is_kw(ts.peek(), "not"):
        ts.next()
        return Not(_neg(ts, angle))
    return _atom(ts, angle)


def _relop_ahead(tok, angle: bool) -> bool:
    if not tok.is_op(*RELOPS):
        return False
    return not (angle and tok.value == ">")


def _atom(ts: TokenStream, angle: bool):
    t = ts.peek()
    if t.is_op("("):
        save = ts.i
        ts.next()
        try:
            p = _iff(ts, False)
            ts.expect_op(")")
        except SyntaxError_:
            ts.i = save
        else:
            nxt = ts.peek()
            if not (_relop_ahead(nxt, angle) or nxt.is_op("+", "-")):
                return p
            ts.i = save
    if t.kind == "id" and t.value in ("true", "btrue", "TRUE"):
        ts.next()
        return BoolLit(True)
    if t.kind == "id" and t.value in ("false", "bfalse", "FALSE"):
        ts.next()
        return BoolLit(False)
    left = parse_expr(ts)
    op_tok = ts.peek()
    if not _relop_ahead(op_tok, angle):
        ts.fail("expected comparison operator")
    op = ts.next().value
    if op in (":", "/:"):
        return Member(left, _collection(ts), negated=(op == "/:"))
    return Compare(op, left, parse_expr(ts))


def parse_pred_text(text: str):
    ts = TokenStream.of(text)
    p = parse_pred(ts)
    ts.expect_end()
    return p


# ------------------------------------------------------------------- machines

@dataclass
class RawAssign:
    target: str
    expr: object
    line: int
    col: int


@dataclass
class RawOperation:
    name: str
    params: list[str]
    guard: object
    effects: list[RawAssign]
    line: int
    col: int


@dataclass
class RawMachine:
    kind: str
    name: str
    refines: str | None = None
    sets: list[tuple[str, list[str], int, int]] = field(default_factory=list)
    variables: list[tuple[str, int, int]] = field(default_factory=list)
    invariant: object = None
    init: list[list[RawAssign]] = field(default_factory=list)
    operations: list[RawOperation] = field(default_factory=list)
    positions: dict[str, tuple[int, int]] = field(default_factory=dict)


def _assignments(ts: TokenStream) -> list[RawAssign]:
    if ts.accept_id("skip"):
        return []
    if ts.accept_id("BEGIN"):
        out = _assignments(ts)
        ts.expect_id("END")
        return out
    out = []
    while True:
        t = ts.expect_id()
        ts.expect_op(":=")
        out.append(RawAssign(t.value, parse_expr(ts), t.line, t.col))
        if not ts.accept_op("||"):
            return out


def _init(ts: TokenStream) -> list[list[RawAssign]]:
    if ts.accept_id("CHOICE"):
        blocks = [_assignments(ts)]
        while ts.accept_id("OR"):
            blocks.append(_assignments(ts))
        ts.expect_id("END")
        return blocks
    return [_assignments(ts)]


def _operation(ts: TokenStream) -> RawOperation:
    head = ts.expect_id()
    params = []
    if ts.accept_op("("):
        params.append(ts.expect_id().value)
        while ts.accept_op(","):
            params.append(ts.expect_id().value)
        ts.expect_op(")")
    ts.expect_op("=")
    guard = BoolLit(True)
    if ts.accept_id("SELECT"):
        guard = parse_pred(ts)
        ts.expect_id("THEN")
        effects = _assignments(ts)
        ts.expect_id("END")
    else:
        effects = _assignments(ts)
    return RawOperation(head.value, params, guard, effects, head.line, head.col)


def parse_raw_machine(text: str) -> RawMachine:
    ts = TokenStream.of(text)
    head = ts.expect_id("MACHINE", "REFINEMENT")
    raw = RawMachine(head.value, ts.expect_id().value)
    if head.value == "REFINEMENT" or ts.peek().is_id("REFINES"):
        if ts.accept_id("REFINES"):
            raw.refines = ts.expect_id().value
    while not ts.accept_id("END"):
        t = ts.peek()
        if ts.accept_id("SETS"):
            while True:
                nt = ts.expect_id()
                ts.expect_op("=")
                ts.expect_op("{")
                elems = [ts.expect_id().value]
                while ts.accept_op(","):
                    elems.append(ts.expect_id().value)
                ts.expect_op("}")
                raw.sets.append((nt.value, elems, nt.line, nt.col))
                if not ts.accept_op(";"):
                    break
        elif ts.accept_id("VARIABLES", "ABSTRACT_VARIABLES", "CONCRETE_VARIABLES"):
            v = ts.expect_id()
            raw.variables.append((v.value, v.line, v.col))
            while ts.accept_op(","):
                v = ts.expect_id()
                raw.variables.append((v.value, v.line, v.col))
        elif ts.accept_id("INVARIANT"):
            raw.positions.setdefault("INVARIANT", (t.line, t.col))
            inv = parse_pred(ts)
            raw.invariant = inv if raw.invariant is None else BinPred("&", raw.invariant, inv)
        elif ts.accept_id("INITIALISATION"):
            raw.positions["INITIALISATION"] = (t.line, t.col)
            raw.init = _init(ts)
        elif ts.accept_id("OPERATIONS"):
            if not ts.peek().is_id("END"):
                raw.operations.append(_operation(ts))
                while ts.accept_op(";"):
                    raw.operations.append(_operation(ts))
        else:
            ts.fail("expected a machine clause", t)
    ts.expect_end()
    return raw
