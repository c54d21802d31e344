"""A small relational query language for inspection formulas.

Values are symbols (``str``), numbers (``int``/``Fraction``), booleans,
``frozenset`` sets, 2-tuples (maplets), ``Call`` label atoms and closed
``Interval`` values. Tuples with more than two components nest to the left,
so ``a |-> b |-> c`` and ``(a, b, c)`` both denote ``((a, b), c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import QueryError
from .lexer import TokenStream


@dataclass(frozen=True)
class Call:
    """An operation label with argument values, e.g. ``Send_cmd(cmd_cars_r)``."""
    op: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.op}({','.join(show_value(a) for a in self.args)})"


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


# ------------------------------------------------------------------------ AST

@dataclass(frozen=True)
class QLit:
    value: object


@dataclass(frozen=True)
class QName:
    name: str


@dataclass(frozen=True)
class QSet:
    items: tuple


@dataclass(frozen=True)
class QTuple:
    items: tuple


@dataclass(frozen=True)
class QInterval:
    lo: object
    hi: object


@dataclass(frozen=True)
class QBin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class QNot:
    operand: object


@dataclass(frozen=True)
class QNeg:
    operand: object


@dataclass(frozen=True)
class QCall:
    """``name(args)``: builtin, relation application or label atom, decided at runtime."""
    name: str
    args: tuple


@dataclass(frozen=True)
class QApply:
    fn: object
    arg: object


@dataclass(frozen=True)
class QImage:
    rel: object
    arg: object


@dataclass(frozen=True)
class QInverse:
    rel: object


BUILTINS = ("card", "min", "max", "dom", "ran")
_RELOPS = ("=", "/=", "<", "<=", ">", ">=", ":", "/:", "<:", "<<:")


# --------------------------------------------------------------------- parser

class _Parser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    def formula(self):
        left = self.impl()
        while self.ts.accept_op("<=>"):
            left = QBin("<=>", left, self.impl())
        return left

    def impl(self):
        left = self.disj()
        while self.ts.accept_op("=>"):
            left = QBin("=>", left, self.disj())
        return left

    def disj(self):
        left = self.conj()
        while self._kw("or"):
            left = QBin("or", left, self.conj())
        return left

    def conj(self):
        left = self.neg()
        while self.ts.accept_op("&"):
            left = QBin("&", left, self.neg())
        return left

    def _kw(self, word) -> bool:
        t = self.ts.peek()
        if t.value == word and t.kind in ("op", "id"):
            self.ts.next()
            return True
        return False

    def neg(self):
        if self._kw("not"):
            return QNot(self.neg())
        return self.rel()

    def rel(self):
        left = self.maplet()
        t = self.ts.peek()
        if t.is_op(*_RELOPS):
            self.ts.next()
            return QBin(t.value, left, self.maplet())
        return left

    def maplet(self):
        left = self.setop()
        while self.ts.accept_op("|->"):
            left = QTuple((left, self.setop()))
        return left

    def setop(self):
        left = self.additive()
        while True:
            t = self.ts.peek()
            if t.is_op("union", "inter"):
                self.ts.next()
                left = QBin(t.value, left, self.additive())
            else:
                return left

    def additive(self):
        left = self.mult()
        while self.ts.peek().is_op("+", "-"):
            op = self.ts.next().value
            left = QBin(op, left, self.mult())
        return left

    def mult(self):
        left = self.unary()
        while self.ts.peek().is_op("*", "/"):
            op = self.ts.next().value
            left = QBin(op, left, self.unary())
        return left

    def unary(self):
        if self.ts.accept_op("-"):
            return QNeg(self.unary())
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while True:
            if self.ts.accept_op("~"):
                e = QInverse(e)
            elif self.ts.accept_op("["):
                arg = self.formula()
                self.ts.expect_op("]")
                e = QImage(e, arg)
            elif self.ts.peek().is_op("(") and not isinstance(e, QName):
                self.ts.next()
                arg = self._args_tuple()
                e = QApply(e, arg)
            else:
                return e

    def _arg_list(self) -> tuple:
        args = []
        if not self.ts.peek().is_op(")"):
            args.append(self.formula())
            while self.ts.accept_op(","):
                args.append(self.formula())
        self.ts.expect_op(")")
        return tuple(args)

    def _args_tuple(self):
        args = self._arg_list()
        return args[0] if len(args) == 1 else QTuple(args)

    def primary(self):
        ts = self.ts
        t = ts.peek()
        if t.kind == "num":
            ts.next()
            return QLit(Fraction(t.value) if "." in t.value else int(t.value))
        if t.kind == "str":
            ts.next()
            return QLit(t.value)
        if t.kind == "id":
            ts.next()
            if t.value in ("true", "TRUE"):
                return QLit(True)
            if t.value in ("false", "FALSE"):
                return QLit(False)
            if ts.accept_op("("):
                return QCall(t.value, self._arg_list())
            return QName(t.value)
        if ts.accept_op("("):
            items = [self.formula()]
            while ts.accept_op(","):
                items.append(self.formula())
            ts.expect_op(")")
            return items[0] if len(items) == 1 else QTuple(tuple(items))
        if ts.accept_op("{"):
            items = []
            if not ts.peek().is_op("}"):
                items.append(self.formula())
                while ts.accept_op(","):
                    items.append(self.formula())
            ts.expect_op("}")
            return QSet(tuple(items))
        if ts.accept_op("["):
            lo = self.additive()
            ts.expect_op(",")
            hi = self.additive()
            ts.expect_op("]")
            return QInterval(lo, hi)
        ts.fail("expected a query expression")


def parse_query(ts_or_text) -> object:
    """Parse a query formula from text (whole input) or from a token stream."""
    if isinstance(ts_or_text, str):
        ts = TokenStream.of(ts_or_text)
        q = _Parser(ts).formula()
        ts.expect_end()
        return q
    return _Parser(ts_or_text).formula()


def parse_query_expr(ts: TokenStream) -> object:
    """Parse a value expression (no top-level logical connectives)."""
    return _Parser(ts).maplet()


# ------------------------------------------------------------------ evaluation

def _pair(items: list):
    v = items[0]
    for x in items[1:]:
        v = (v, x)
    return v


def _as_set(v, what: str) -> frozenset:
    if isinstance(v, frozenset):
        return v
    raise QueryError(f"{what} is not a set: {show_value(v)}")


def _num(v):
    if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
        raise QueryError(f"not a number: {show_value(v)}")
    return v


def _apply(rel, arg):
    rel = _as_set(rel, "applied value")
    hits = [p[1] for p in rel if isinstance(p, tuple) and len(p) == 2 and p[0] == arg]
    if len(hits) != 1:
        raise QueryError(f"{'no' if not hits else 'several'} image(s) for {show_value(arg)}")
    return hits[0]


def _builtin(name: str, args: list):
    if len(args) != 1:
        raise QueryError(f"{name} takes one argument")
    v = args[0]
    if name == "card":
        return len(_as_set(v, "card argument"))
    if name in ("dom", "ran"):
        rel = _as_set(v, f"{name} argument")
        return frozenset(p[0 if name == "dom" else 1] for p in rel)
    items = list(v) if isinstance(v, (frozenset, tuple)) else None
    if not items:
        raise QueryError(f"{name} needs a non-empty set or pair")
    try:
        return min(items) if name == "min" else max(items)
    except TypeError as e:
        raise QueryError(f"{name}: incomparable values") from e


def evaluate(q, env: dict):
    """Evaluate query AST ``q``; unbound names denote symbols."""
    if isinstance(q, QLit):
        return q.value
    if isinstance(q, QName):
        return env.get(q.name, q.name)
    if isinstance(q, QSet):
        return frozenset(evaluate(i, env) for i in q.items)
    if isinstance(q, QTuple):
        return _pair([evaluate(i, env) for i in q.items])
    if isinstance(q, QInterval):
        return Interval(_num(evaluate(q.lo, env)), _num(evaluate(q.hi, env)))
    if isinstance(q, QNot):
        return not _bool(evaluate(q.operand, env))
    if isinstance(q, QNeg):
        return -_num(evaluate(q.operand, env))
    if isinstance(q, QCall):
        args = [evaluate(a, env) for a in q.args]
        if q.name in env:
            return _apply(env[q.name], args[0] if len(args) == 1 else _pair(args))
        if q.name in BUILTINS:
            return _builtin(q.name, args)
        return Call(q.name, tuple(args))
    if isinstance(q, QApply):
        return _apply(evaluate(q.fn, env), evaluate(q.arg, env))
    if isinstance(q, QImage):
        rel = _as_set(evaluate(q.rel, env), "relation")
        arg = _as_set(evaluate(q.arg, env), "image argument")
        return frozenset(p[1] for p in rel if isinstance(p, tuple) and p[0] in arg)
    if isinstance(q, QInverse):
        rel = _as_set(evaluate(q.rel, env), "relation")
        return frozenset((p[1], p[0]) for p in rel)
    if isinstance(q, QBin):
        return _binary(q, env)
    raise QueryError(f"cannot evaluate {q!r}")


def _bool(v) -> bool:
    if not isinstance(v, bool):
        raise QueryError(f"not a truth value: {show_value(v)}")
    return v


def _binary(q: QBin, env: dict):
    op = q.op
    if op in ("&", "or", "=>", "<=>"):
        a = _bool(evaluate(q.left, env))
        if op == "&" and not a:
            return False
        if op == "or" and a:
            return True
        if op == "=>" and not a:
            return True
        b = _bool(evaluate(q.right, env))
        return (a == b) if op == "<=>" else b
    a, b = evaluate(q.left, env), evaluate(q.right, env)
    if op == "=":
        return a == b
    if op == "/=":
        return a != b
    if op in ("<", "<=", ">", ">="):
        a, b = _num(a), _num(b)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    if op in (":", "/:"):
        if isinstance(b, Interval):
            hit = a in b
        else:
            hit = a in _as_set(b, "membership target")
        return hit if op == ":" else not hit
    if op in ("<:", "<<:"):
        sa, sb = _as_set(a, "subset operand"), _as_set(b, "subset operand")
        return sa <= sb if op == "<:" else sa < sb
    if op == "union":
        return _as_set(a, "union operand") | _as_set(b, "union operand")
    if op == "inter":
        return _as_set(a, "inter operand") & _as_set(b, "inter operand")
    a, b = _num(a), _num(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise QueryError("division by zero")
        return Fraction(a) / Fraction(b)
    raise QueryError(f"unknown operator {op}")


def holds(q, env: dict) -> bool:
    v = evaluate(q, env)
    if not isinstance(v, bool):
        raise QueryError(f"formula does not denote a truth value: {show_value(v)}")
    return v


def show_value(v) -> str:
    """Deterministic rendering of a query value (sets are sorted by rendering)."""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{float(v):.6g}"
    if isinstance(v, frozenset):
        return "{" + ", ".join(sorted(show_value(x) for x in v)) + "}"
    if isinstance(v, tuple) and len(v) == 2:
        return f"({show_value(v[0])} |-> {show_value(v[1])})"
    if isinstance(v, Interval):
        return f"[{show_value(v.lo)}, {show_value(v.hi)}]"
    if hasattr(v, "show"):
        return v.show()
    return str(v)


# ---------------------------------------------------------- binding builders

def label_value(label) -> object:
    """Query value of a transition label: a symbol, or a Call with arguments."""
    if not label.args:
        return label.op
    return Call(label.op, tuple(v for _, v in label.args))


def relation(pairs) -> frozenset:
    return frozenset(pairs)


def mapping(d: dict) -> frozenset:
    return frozenset(d.items())


# ------------------------------------------------------------------- printing

def _show_lit(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, str):
        return '"' + v + '"'
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return f"{v.numerator}.0"
        text = decimal_text(v)
        if text is None:
            raise QueryError(f"literal {v} has no finite decimal form")
        return text
    return str(v)


def decimal_text(v: Fraction) -> str | None:
    sign = "-" if v < 0 else ""
    v = abs(v)
    for places in range(1, 40):
        scaled = v * 10 ** places
        if scaled.denominator == 1:
            whole, frac = divmod(scaled.numerator, 10 ** places)
            return f"{sign}{whole}.{frac:0{places}d}"
    return None


_OP_TEXT = {"union": "\\/", "inter": "/\\"}


def show_query(q) -> str:
    """Fully parenthesised rendering that parses back to an equal AST."""
    if isinstance(q, QLit):
        return _show_lit(q.value)
    if isinstance(q, QName):
        return q.name
    if isinstance(q, QSet):
        return "{" + ", ".join(show_query(i) for i in q.items) + "}"
    if isinstance(q, QTuple):
        return "(" + ", ".join(show_query(i) for i in q.items) + ")"
    if isinstance(q, QInterval):
        return f"[{show_query(q.lo)}, {show_query(q.hi)}]"
    if isinstance(q, QNot):
        return f"not ({show_query(q.operand)})"
    if isinstance(q, QNeg):
        return f"-({show_query(q.operand)})"
    if isinstance(q, QCall):
        return f"{q.name}(" + ", ".join(show_query(a) for a in q.args) + ")"
    if isinstance(q, QApply):
        return f"({show_query(q.fn)})({show_query(q.arg)})"
    if isinstance(q, QImage):
        return f"({show_query(q.rel)})[{show_query(q.arg)}]"
    if isinstance(q, QInverse):
        return f"({show_query(q.rel)})~"
    if isinstance(q, QBin):
        op = _OP_TEXT.get(q.op, q.op)
        return f"({show_query(q.left)} {op} {show_query(q.right)})"
    raise QueryError(f"cannot print {q!r}")
