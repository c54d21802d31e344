"""Tableau construction of generalised Büchi automata for future-time LTL.

Formulas are nested tuples in negation normal form over the operators
``and or X U R`` plus literals: ``("true",)``, ``("false",)``, atoms
``("ap", pred)`` / ``("bit", i)`` and their negations ``("not", atom)``.
"""

from __future__ import annotations

from dataclasses import dataclass

TRUE = ("true",)
FALSE = ("false",)
INIT_ID = -1


def is_literal(f) -> bool:
    return f[0] in ("true", "false", "ap", "bit") or (f[0] == "not" and f[1][0] in ("ap", "bit"))


def negate_literal(f):
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    return f[1] if f[0] == "not" else ("not", f)


def nnf(f, neg: bool = False):
    """Negation normal form over and/or/X/U/R; G, F, W, => and <=> are rewritten."""
    op = f[0]
    if op == "true":
        return FALSE if neg else TRUE
    if op == "false":
        return TRUE if neg else FALSE
    if op in ("ap", "bit"):
        return ("not", f) if neg else f
    if op == "not":
        return nnf(f[1], not neg)
    if op in ("and", "or"):
        a, b = nnf(f[1], neg), nnf(f[2], neg)
        return ((("or" if op == "and" else "and") if neg else op), a, b)
    if op == "implies":
        return nnf(("or", ("not", f[1]), f[2]), neg)
    if op == "iff":
        a, b = f[1], f[2]
        return nnf(("or", ("and", a, b), ("and", ("not", a), ("not", b))), neg)
    if op == "X":
        return ("X", nnf(f[1], neg))
    if op == "F":
        return nnf(("U", TRUE, f[1]), neg)
    if op == "G":
        return nnf(("R", FALSE, f[1]), neg)
    if op == "W":
        # a W b  ==  b R (b or a)
        return nnf(("R", f[2], ("or", f[2], f[1])), neg)
    if op in ("U", "R"):
        a, b = nnf(f[1], neg), nnf(f[2], neg)
        return ((("R" if op == "U" else "U") if neg else op), a, b)
    raise ValueError(f"not a future formula: {f!r}")


@dataclass
class _Node:
    id: int
    incoming: set
    new: list
    old: set
    nxt: set


@dataclass
class Automaton:
    """States with literal labels, successor ids and acceptance sets."""
    labels: dict  # id -> frozenset of literals
    succ: dict  # id -> list of ids
    initial: list
    accepting: list  # list of sets of ids (generalised acceptance)


def build_automaton(f) -> Automaton:
    """GPVW on-the-fly tableau for NNF formula ``f``."""
    counter = [0]
    done: list[_Node] = []

    def fresh() -> int:
        counter[0] += 1
        return counter[0]

    def expand(node: _Node) -> None:
        stack = [node]
        while stack:
            nd = stack.pop()
            if not nd.new:
                for other in done:
                    if other.old == nd.old and other.nxt == nd.nxt:
                        other.incoming |= nd.incoming
                        break
                else:
                    done.append(nd)
                    stack.append(_Node(fresh(), {nd.id}, list(nd.nxt), set(), set()))
                continue
            eta = nd.new.pop()
            if eta in nd.old:
                stack.append(nd)
                continue
            if is_literal(eta):
                if eta == FALSE or negate_literal(eta) in nd.old:
                    continue
                nd.old.add(eta)
                stack.append(nd)
                continue
            op = eta[0]
            if op == "and":
                nd.old.add(eta)
                nd.new.extend(x for x in (eta[1], eta[2]) if x not in nd.old)
                stack.append(nd)
            elif op == "X":
                nd.old.add(eta)
                nd.nxt.add(eta[1])
                stack.append(nd)
            elif op in ("or", "U", "R"):
                a, b = eta[1], eta[2]
                if op == "or":
                    new1, next1, new2 = [a], set(), [b]
                elif op == "U":
                    new1, next1, new2 = [a], {eta}, [b]
                else:
                    new1, next1, new2 = [b], {eta}, [a, b]
                old = nd.old | {eta}
                n1 = _Node(fresh(), set(nd.incoming),
                           nd.new + [x for x in new1 if x not in old], set(old), nd.nxt | next1)
                n2 = _Node(fresh(), set(nd.incoming),
                           nd.new + [x for x in new2 if x not in old], set(old), set(nd.nxt))
                stack.append(n2)
                stack.append(n1)
            else:
                raise ValueError(f"unexpected operator {op}")

    expand(_Node(fresh(), {INIT_ID}, [f], set(), set()))

    labels = {n.id: frozenset(x for x in n.old if is_literal(x)) for n in done}
    succ: dict = {n.id: [] for n in done}
    initial = []
    for n in done:
        for src in n.incoming:
            if src == INIT_ID:
                initial.append(n.id)
            elif src in succ:
                succ[src].append(n.id)
    untils = sorted({g for g in _subformulas(f) if g[0] == "U"}, key=repr)
    accepting = [{n.id for n in done if u not in n.old or u[2] in n.old} for u in untils]
    return Automaton(labels, succ, sorted(initial), accepting)


def _subformulas(f):
    yield f
    if f[0] in ("and", "or", "U", "R"):
        yield from _subformulas(f[1])
        yield from _subformulas(f[2])
    elif f[0] in ("X", "not"):
        yield from _subformulas(f[1])
