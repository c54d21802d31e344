"""Validation obligation expressions over task ids.

Precedence, tightest first: negation, ``;``, conjunction, disjunction,
implication, equivalence. Binary operators associate to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import SyntaxError_

# binary operators from loosest to tightest
BINARY = ("iff", "implies", "or", "and", "seq")
SYMBOL = {"iff": "⇔", "implies": "⇒", "or": "∨", "and": "∧", "seq": ";"}
ASCII = {"iff": "<=>", "implies": "=>", "or": "|", "and": "&", "seq": ";"}

_OPS = {"⇔": "iff", "<=>": "iff", "⟺": "iff", "⇒": "implies", "=>": "implies",
        "⟹": "implies", "∨": "or", "|": "or", "∧": "and", "&": "and", ";": "seq",
        "¬": "not", "!": "not", "(": "(", ")": ")"}
_TOKEN = re.compile(r"\s*(?:(?P<op><=>|=>|[⇔⟺⇒⟹∨|∧&;¬!()])|(?P<id>[A-Za-z_][\w.\-]*))")
_ID = re.compile(r"[A-Za-z_][\w.\-]*")


@dataclass(frozen=True)
class Leaf:
    id: str


@dataclass(frozen=True)
class NotVo:
    operand: object


@dataclass(frozen=True)
class BinVo:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class VoDecl:
    id: str
    validates: tuple
    expr: object
    line: int = field(default=0, compare=False)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SyntaxError_(f"unexpected character {text[pos:].lstrip()[:1]!r}", 0, pos + 1)
        if m.group("op"):
            out.append(("op", _OPS[m.group("op")], m.start("op")))
        else:
            out.append(("id", m.group("id"), m.start("id")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", -1)

    def fail(self, msg: str):
        raise SyntaxError_(msg, 0, self.peek()[2] + 1)

    def binary(self, level: int):
        if level == len(BINARY):
            return self.unary()
        op = BINARY[level]
        left = self.binary(level + 1)
        while self.peek()[:2] == ("op", op):
            self.i += 1
            left = BinVo(op, left, self.binary(level + 1))
        return left

    def unary(self):
        kind, value, _ = self.peek()
        if (kind, value) == ("op", "not"):
            self.i += 1
            return NotVo(self.unary())
        if (kind, value) == ("op", "("):
            self.i += 1
            e = self.binary(0)
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.i += 1
            return e
        if kind == "id":
            self.i += 1
            return Leaf(value)
        self.fail("expected a task id, '¬' or '('")


def parse_vo_expr(text: str):
    p = _Parser(text)
    e = p.binary(0)
    if p.peek()[0] != "eof":
        p.fail("unexpected input after expression")
    return e


_VO_LINE = re.compile(r"^\s*(?P<id>[A-Za-z_][\w.\-]*)\s*(?:\[\s*validates\s+(?P<reqs>[^\]]*)\])?"
                      r"\s*:(?P<expr>.*)$", re.S)


def parse_vo(line: str, lineno: int = 0) -> VoDecl:
    """``ID [validates R1,R2]: expression``."""
    m = _VO_LINE.match(line)
    if not m:
        raise SyntaxError_("expected ID [validates ...]: expression", lineno, 1)
    reqs = tuple(r.strip() for r in (m.group("reqs") or "").split(",") if r.strip())
    for r in reqs:
        if not _ID.fullmatch(r):
            raise SyntaxError_(f"bad requirement id {r!r}", lineno, 1)
    try:
        expr = parse_vo_expr(m.group("expr"))
    except SyntaxError_ as e:
        raise SyntaxError_(f"{m.group('id')}: {e.diagnostics[0].message}", lineno,
                           m.start("expr") + e.column) from None
    return VoDecl(m.group("id"), reqs, expr, lineno)


def leaves(e) -> list[str]:
    """Task ids in left-to-right order (with repetitions)."""
    if isinstance(e, Leaf):
        return [e.id]
    if isinstance(e, NotVo):
        return leaves(e.operand)
    return leaves(e.left) + leaves(e.right)


def show_vo_expr(e, parent: int = -1, ascii: bool = False) -> str:
    """Render with the fewest parentheses that preserve the tree."""
    if isinstance(e, Leaf):
        return e.id
    if isinstance(e, NotVo):
        inner = show_vo_expr(e.operand, len(BINARY), ascii)
        return ("!" if ascii else "¬") + inner
    level = BINARY.index(e.op)
    sym = (ASCII if ascii else SYMBOL)[e.op]
    left = show_vo_expr(e.left, level, ascii)
    right = show_vo_expr(e.right, level + 1, ascii)
    s = f"{left} {sym} {right}" if e.op != "seq" else f"{left}; {right}"
    return f"({s})" if parent > level else s


def print_vo(vo: VoDecl) -> str:
    tag = f" [validates {','.join(vo.validates)}]" if vo.validates else ""
    return f"{vo.id}{tag}: {show_vo_expr(vo.expr)}"
