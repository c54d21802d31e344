"""Expression and predicate syntax trees for the machine language."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    """Identifier; resolves to a variable, enum element, parameter or set name."""
    name: str


@dataclass(frozen=True)
class Arith:
    op: str  # "+" or "-"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class SetLit:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Range:
    lo: "Expr"
    hi: "Expr"


Expr = Union[Num, Name, Arith, Neg]
Collection = Union[SetLit, Range, Name]


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Compare:
    op: str  # = /= < <= > >=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Member:
    elem: Expr
    coll: Collection
    negated: bool = False


@dataclass(frozen=True)
class Not:
    operand: "Pred"


@dataclass(frozen=True)
class BinPred:
    op: str  # & or => <=>
    left: "Pred"
    right: "Pred"


Pred = Union[BoolLit, Compare, Member, Not, BinPred]

_PRED_PREC = {"<=>": 1, "=>": 2, "or": 3, "&": 4}


def conjuncts(p: Pred) -> list[Pred]:
    """Flatten a top-level conjunction into its conjuncts (left to right)."""
    if isinstance(p, BinPred) and p.op == "&":
        return conjuncts(p.left) + conjuncts(p.right)
    return [p]


def disjuncts(p: Pred) -> list[Pred]:
    if isinstance(p, BinPred) and p.op == "or":
        return disjuncts(p.left) + disjuncts(p.right)
    return [p]


def conjoin(parts: list[Pred]) -> Pred:
    if not parts:
        return BoolLit(True)
    out = parts[0]
    for q in parts[1:]:
        out = BinPred("&", out, q)
    return out


def names_in(node) -> set[str]:
    """All identifiers occurring in an expression or predicate."""
    if isinstance(node, Name):
        return {node.name}
    if isinstance(node, (Num, BoolLit)):
        return set()
    if isinstance(node, Arith):
        return names_in(node.left) | names_in(node.right)
    if isinstance(node, Neg):
        return names_in(node.operand)
    if isinstance(node, SetLit):
        out: set[str] = set()
        for it in node.items:
            out |= names_in(it)
        return out
    if isinstance(node, Range):
        return names_in(node.lo) | names_in(node.hi)
    if isinstance(node, Compare):
        return names_in(node.left) | names_in(node.right)
    if isinstance(node, Member):
        return names_in(node.elem) | names_in(node.coll)
    if isinstance(node, Not):
        return names_in(node.operand)
    if isinstance(node, BinPred):
        return names_in(node.left) | names_in(node.right)
    raise TypeError(f"not a syntax node: {node!r}")


def show_expr(e, parent: int = 0) -> str:
    if isinstance(e, Num):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Neg):
        return f"-{show_expr(e.operand, 3)}"
    if isinstance(e, Arith):
        # left-associative: the right operand needs parentheses at equal precedence
        s = f"{show_expr(e.left, 1)} {e.op} {show_expr(e.right, 2)}"
        return f"({s})" if parent >= 2 else s
    if isinstance(e, SetLit):
        return "{" + ", ".join(show_expr(i) for i in e.items) + "}"
    if isinstance(e, Range):
        return f"{show_expr(e.lo, 1)}..{show_expr(e.hi, 1)}"
    raise TypeError(f"not an expression: {e!r}")


def show_pred(p, parent: int = 0) -> str:
    """Render a predicate in ASCII machine syntax, parenthesising only where needed."""
    if isinstance(p, BoolLit):
        return "true" if p.value else "false"
    if isinstance(p, Compare):
        return f"{show_expr(p.left)} {p.op} {show_expr(p.right)}"
    if isinstance(p, Member):
        op = "/:" if p.negated else ":"
        return f"{show_expr(p.elem)} {op} {show_expr(p.coll)}"
    if isinstance(p, Not):
        return f"not({show_pred(p.operand)})"
    if isinstance(p, BinPred):
        prec = _PRED_PREC[p.op]
        s = f"{show_pred(p.left, prec)} {p.op} {show_pred(p.right, prec + 1)}"
        return f"({s})" if parent > prec else s
    raise TypeError(f"not a predicate: {p!r}")
