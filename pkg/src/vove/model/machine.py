"""Checked machines, states, labels and the transition semantics.

Guards, effects and ad-hoc predicates are compiled to Python closures over
a state's value tuple ``v`` and a parameter tuple ``p``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import (Diagnostic, DuplicateName, GuardNotSatisfied, InitViolatesType,
                      ModelError, TypeMismatch, TypeViolation, UnboundParameter,
                      UnknownIdentifier)
from .ast import (Arith, BinPred, BoolLit, Compare, Member, Name, Neg, Not, Num, Range,
                  SetLit, conjuncts, names_in, show_expr, show_pred)
from .parser import RawMachine, parse_raw_machine

INT = "INTEGER"


@dataclass(frozen=True)
class EnumType:
    name: str
    elements: tuple[str, ...]

    def show(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntType:
    lo: int
    hi: int

    def show(self) -> str:
        return f"{self.lo}..{self.hi}"

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class Variable:
    name: str
    type: EnumType | IntType


@dataclass(frozen=True)
class Assignment:
    target: str
    expr: object


@dataclass(frozen=True)
class Operation:
    name: str
    params: tuple[tuple[str, str], ...]  # (param, enum set name)
    guard: object
    effects: tuple[Assignment, ...]

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)


class State:
    """Immutable valuation of a machine's variables in declaration order."""

    __slots__ = ("names", "values", "_hash")

    def __init__(self, names: tuple[str, ...], values: tuple):
        self.names = names
        self.values = values
        self._hash = hash(values)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return (isinstance(other, State) and self._hash == other._hash
                and self.values == other.values and self.names == other.names)

    def __getitem__(self, name: str):
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def __repr__(self) -> str:
        return "(" + ", ".join(f"{n}={v}" for n, v in zip(self.names, self.values)) + ")"

    def show(self) -> str:
        return "(" + ",".join(str(v) for v in self.values) + ")"


class _Root:
    """The synthetic node before initialisation."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "root"

    def show(self) -> str:
        return "root"

    def __reduce__(self):
        return "ROOT"


ROOT = _Root()


class Label:
    """Transition label: an operation name plus its parameter binding."""

    __slots__ = ("op", "args", "_hash")

    def __init__(self, op: str, args: tuple = ()):
        self.op = op
        self.args = tuple(args)
        self._hash = hash((op, self.args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return isinstance(other, Label) and self.op == other.op and self.args == other.args

    def __repr__(self) -> str:
        return f"Label({self.op!r}, {self.args!r})"

    def __str__(self) -> str:
        if not self.args:
            return self.op
        return f"{self.op}({','.join(str(v) for _, v in self.args)})"

    def show_named(self) -> str:
        if not self.args:
            return self.op
        return f"{self.op}({','.join(f'{n}={v}' for n, v in self.args)})"

    @property
    def binding(self) -> dict:
        return dict(self.args)


INIT = Label("INITIALISATION")


@dataclass(frozen=True)
class Machine:
    name: str
    kind: str
    refines: str | None
    enum_sets: tuple[tuple[str, tuple[str, ...]], ...]
    variables: tuple[Variable, ...]
    invariant: object
    init: tuple[tuple[Assignment, ...], ...]
    operations: tuple[Operation, ...]
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    # ------------------------------------------------------------ lookups
    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def var_type(self, name: str):
        for v in self.variables:
            if v.name == name:
                return v.type
        raise KeyError(name)

    def operation(self, name: str) -> Operation:
        for op in self.operations:
            if op.name == name:
                return op
        raise KeyError(name)

    def set_elements(self, set_name: str) -> tuple[str, ...]:
        return dict(self.enum_sets)[set_name]

    @property
    def element_set(self) -> dict[str, str]:
        c = self._cache.get("elements")
        if c is None:
            c = {e: s for s, els in self.enum_sets for e in els}
            self._cache["elements"] = c
        return c

    def state(self, **values) -> State:
        return State(self.var_names, tuple(values[n] for n in self.var_names))

    def make_state(self, values) -> State:
        return State(self.var_names, tuple(values))


# ---------------------------------------------------------------- type checks

class _Env:
    def __init__(self, m: Machine, params: dict[str, str]):
        self.m = m
        self.vars = {v.name: v.type for v in m.variables}
        self.index = {v.name: i for i, v in enumerate(m.variables)}
        self.elements = m.element_set
        self.sets = dict(m.enum_sets)
        self.params = params  # name -> set name or INT
        self.param_index = {n: i for i, n in enumerate(params)}

    def type_of_name(self, name: str) -> str:
        if name in self.params:
            return self.params[name]
        if name in self.vars:
            t = self.vars[name]
            return t.name if isinstance(t, EnumType) else INT
        if name in self.elements:
            return self.elements[name]
        if name in self.sets:
            raise TypeMismatch(f"set {name} used as a value")
        raise UnknownIdentifier(f"unknown identifier {name}")


def _expr_type(e, env: _Env) -> str:
    if isinstance(e, Num):
        return INT
    if isinstance(e, Name):
        return env.type_of_name(e.name)
    if isinstance(e, (Arith, Neg)):
        parts = [e.operand] if isinstance(e, Neg) else [e.left, e.right]
        for q in parts:
            if _expr_type(q, env) != INT:
                raise TypeMismatch(f"arithmetic on non-integer {show_expr(q)}")
        return INT
    raise TypeMismatch(f"not a value expression: {show_expr(e)}")


def _coll_type(c, env: _Env) -> str | None:
    """Element type of a collection; ``None`` for the empty set literal."""
    if isinstance(c, Name):
        if c.name in env.sets:
            return c.name
        raise UnknownIdentifier(f"unknown set {c.name}")
    if isinstance(c, Range):
        for b in (c.lo, c.hi):
            if _expr_type(b, env) != INT:
                raise TypeMismatch(f"range bound {show_expr(b)} is not an integer")
        return INT
    if isinstance(c, SetLit):
        types = {_expr_type(i, env) for i in c.items}
        if len(types) > 1:
            raise TypeMismatch(f"mixed set literal {show_expr(c)}")
        return types.pop() if types else None
    raise TypeMismatch("bad collection")


def _check_pred(p, env: _Env) -> None:
    if isinstance(p, BoolLit):
        return
    if isinstance(p, Compare):
        lt, rt = _expr_type(p.left, env), _expr_type(p.right, env)
        if lt != rt:
            raise TypeMismatch(f"cannot compare {show_expr(p.left)} with {show_expr(p.right)}")
        if p.op not in ("=", "/=") and lt != INT:
            raise TypeMismatch(f"ordering comparison on non-integers in {show_pred(p)}")
        return
    if isinstance(p, Member):
        et, ct = _expr_type(p.elem, env), _coll_type(p.coll, env)
        if ct is not None and et != ct:
            raise TypeMismatch(f"membership type mismatch in {show_pred(p)}")
        return
    if isinstance(p, Not):
        return _check_pred(p.operand, env)
    if isinstance(p, BinPred):
        _check_pred(p.left, env)
        _check_pred(p.right, env)
        return
    raise TypeMismatch(f"not a predicate: {p!r}")


# ---------------------------------------------------------------- compilation

class _Compiler:
    def __init__(self, env: _Env):
        self.env = env
        self.consts: dict[str, object] = {}

    def const(self, value) -> str:
        name = f"_c{len(self.consts)}"
        self.consts[name] = value
        return name

    def expr(self, e) -> str:
        env = self.env
        if isinstance(e, Num):
            return repr(e.value)
        if isinstance(e, Name):
            n = e.name
            if n in env.param_index:
                return f"p[{env.param_index[n]}]"
            if n in env.index:
                return f"v[{env.index[n]}]"
            if n in env.elements:
                return repr(n)
            raise UnboundParameter(f"unbound identifier {n}")
        if isinstance(e, Arith):
            return f"({self.expr(e.left)} {e.op} {self.expr(e.right)})"
        if isinstance(e, Neg):
            return f"(-{self.expr(e.operand)})"
        raise TypeMismatch(f"cannot compile {e!r}")

    def pred(self, p) -> str:
        if isinstance(p, BoolLit):
            return "True" if p.value else "False"
        if isinstance(p, Compare):
            op = {"=": "==", "/=": "!="}.get(p.op, p.op)
            return f"({self.expr(p.left)} {op} {self.expr(p.right)})"
        if isinstance(p, Member):
            x = self.expr(p.elem)
            c = p.coll
            if isinstance(c, Name):
                test = f"({x} in {self.const(frozenset(self.env.sets[c.name]))})"
            elif isinstance(c, Range):
                test = f"({self.expr(c.lo)} <= {x} <= {self.expr(c.hi)})"
            else:
                items = [self.expr(i) for i in c.items]
                if all(not ("v[" in s or "p[" in s) for s in items):
                    values = frozenset(eval(s) for s in items)  # literal reprs only
                    test = f"({x} in {self.const(values)})"
                else:
                    test = f"({x} in ({', '.join(items)},))"
            return f"(not {test})" if p.negated else test
        if isinstance(p, Not):
            return f"(not {self.pred(p.operand)})"
        if isinstance(p, BinPred):
            a, b = self.pred(p.left), self.pred(p.right)
            if p.op == "&":
                return f"({a} and {b})"
            if p.op == "or":
                return f"({a} or {b})"
            if p.op == "=>":
                return f"((not {a}) or {b})"
            return f"({a} == {b})"
        raise TypeMismatch(f"cannot compile {p!r}")

    def build(self, body: str):
        return eval(f"lambda v, p: {body}", dict(self.consts))


def compile_pred(m: Machine, p, params: dict[str, str] | tuple = ()):
    """Compile ``p`` to ``f(values, param_values) -> bool``.

    ``params`` maps parameter names (in positional order) to their types;
    a plain tuple of names leaves them untyped (no type check).
    """
    key = ("pred", p, tuple(params.items()) if isinstance(params, dict) else tuple(params))
    fn = m._cache.get(key)
    if fn is None:
        typed = dict(params) if isinstance(params, dict) else dict.fromkeys(params, None)
        env = _Env(m, typed)
        if isinstance(params, dict) and all(t is not None for t in params.values()):
            _check_pred(p, env)
        comp = _Compiler(env)
        fn = comp.build(comp.pred(p))
        m._cache[key] = fn
    return fn


def compile_expr(m: Machine, e):
    """Compile a value expression over state variables to ``f(values)``."""
    key = ("expr", e)
    fn = m._cache.get(key)
    if fn is None:
        env = _Env(m, {})
        _expr_type(e, env)
        comp = _Compiler(env)
        g = comp.build(comp.expr(e))
        fn = m._cache[key] = lambda v: g(v, ())
    return fn


def typecheck_pred(m: Machine, p, params: dict[str, str] | None = None) -> None:
    """Raise UnknownIdentifier/TypeMismatch if ``p`` is ill-formed for ``m``."""
    _check_pred(p, _Env(m, dict(params or {})))


def _binding_types(m: Machine, bindings: dict) -> dict[str, str]:
    out = {}
    for k, v in bindings.items():
        if isinstance(v, bool) or not isinstance(v, (int, str)):
            raise TypeMismatch(f"bad parameter value {v!r}")
        out[k] = INT if isinstance(v, int) else m.element_set.get(v, "?")
    return out


def eval_pred(m: Machine, p, s: State, bindings: dict | None = None) -> bool:
    """Evaluate predicate ``p`` in state ``s`` with parameter ``bindings``."""
    bindings = bindings or {}
    names = tuple(sorted(bindings))
    for n in names_in(p):
        if (n not in bindings and n not in m.var_names and n not in m.element_set
                and n not in dict(m.enum_sets)):
            raise UnboundParameter(f"no value for identifier {n}")
    fn = compile_pred(m, p, names)
    return bool(fn(s.values, tuple(bindings[n] for n in names)))


# ----------------------------------------------------------------- semantics

def _compiled_ops(m: Machine):
    ops = m._cache.get("ops")
    if ops is not None:
        return ops
    ops = []
    for op in m.operations:
        env = _Env(m, dict(op.params))
        comp = _Compiler(env)
        guard = comp.build(comp.pred(op.guard))
        targets = {a.target: a.expr for a in op.effects}
        parts = [comp.expr(targets[n]) if n in targets else f"v[{i}]"
                 for i, n in enumerate(m.var_names)]
        effect = comp.build("(" + "".join(x + ", " for x in parts) + ")")
        domains = [m.set_elements(t) for _, t in op.params]
        bindings = [tuple(b) for b in itertools.product(*domains)]
        labels = [Label(op.name, tuple(zip(op.param_names, b))) for b in bindings]
        checks = [(i, v.type) for i, v in enumerate(m.variables)
                  if isinstance(v.type, IntType) and v.name in targets]
        ops.append((op, guard, effect, list(zip(bindings, labels)), checks))
    m._cache["ops"] = ops
    return ops


def _check_bounds(m: Machine, values: tuple, checks, exc=TypeViolation) -> None:
    for i, t in checks:
        x = values[i]
        if not (t.lo <= x <= t.hi):
            raise exc(f"{m.variables[i].name} = {x} outside {t.show()}")


def initial_states(m: Machine) -> list[State]:
    """Distinct initial states, in the order of the alternative init blocks."""
    cached = m._cache.get("init")
    if cached is not None:
        return list(cached)
    env = _Env(m, {})
    out: list[State] = []
    for block in m.init:
        targets = {a.target: a.expr for a in block}
        comp = _Compiler(env)
        fn = comp.build("(" + "".join(comp.expr(targets[n]) + ", " for n in m.var_names) + ")")
        values = fn((), ())
        checks = [(i, v.type) for i, v in enumerate(m.variables) if isinstance(v.type, IntType)]
        _check_bounds(m, values, checks, InitViolatesType)
        st = m.make_state(values)
        if st not in out:
            out.append(st)
    m._cache["init"] = tuple(out)
    return out


def successors(m: Machine, s: State) -> list[tuple[Label, State]]:
    """All (label, successor) pairs of ``s`` in canonical order."""
    cache = m._cache.setdefault("succ", {})
    hit = cache.get(s)
    if hit is not None:
        return hit
    v = s.values
    out = []
    for _op, guard, effect, bindings, checks in _compiled_ops(m):
        for b, label in bindings:
            if guard(v, b):
                nv = effect(v, b)
                if checks:
                    _check_bounds(m, nv, checks)
                out.append((label, State(s.names, nv)))
    cache[s] = out
    return out


def enabled_events(m: Machine, s: State) -> list[Label]:
    return [lab for lab, _ in successors(m, s)]


def apply_event(m: Machine, s: State, op: str, binding: dict | None = None) -> State:
    binding = binding or {}
    for o, guard, effect, _bindings, checks in _compiled_ops(m):
        if o.name != op:
            continue
        if set(binding) != set(o.param_names):
            raise UnboundParameter(f"{op} needs parameters {', '.join(o.param_names) or 'none'}")
        b = tuple(binding[n] for n in o.param_names)
        for (n, t), x in zip(o.params, b):
            if x not in m.set_elements(t):
                raise TypeMismatch(f"{x!r} is not in {t}")
        if not guard(s.values, b):
            raise GuardNotSatisfied(f"guard of {op} does not hold in {s!r}")
        nv = effect(s.values, b)
        _check_bounds(m, nv, checks)
        return State(s.names, nv)
    raise UnknownIdentifier(f"unknown operation {op}")


def guard_holds(m: Machine, s: State, op: str, binding: dict | None = None) -> bool:
    for o, guard, _e, _b, _c in _compiled_ops(m):
        if o.name == op:
            binding = binding or {}
            return bool(guard(s.values, tuple(binding[n] for n in o.param_names)))
    raise UnknownIdentifier(f"unknown operation {op}")


def all_typed_states(m: Machine) -> list[State]:
    """Every type-correct valuation (the full product of variable domains)."""
    domains = [v.type.elements for v in m.variables]
    return [m.make_state(vals) for vals in itertools.product(*domains)]


# ------------------------------------------------------------------- building

def _const_int(e) -> int | None:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg):
        x = _const_int(e.operand)
        return None if x is None else -x
    if isinstance(e, Arith):
        a, b = _const_int(e.left), _const_int(e.right)
        if a is None or b is None:
            return None
        return a + b if e.op == "+" else a - b
    return None


def _infer_types(conjs, names: set[str], sets: dict, elements: dict) -> dict:
    """Types for ``names`` read off typing conjuncts ``n : T``."""
    out: dict = {}
    for c in conjs:
        if not (isinstance(c, Member) and not c.negated and isinstance(c.elem, Name)):
            continue
        n = c.elem.name
        if n not in names or n in out:
            continue
        coll = c.coll
        if isinstance(coll, Name) and coll.name in sets:
            out[n] = EnumType(coll.name, tuple(sets[coll.name]))
        elif isinstance(coll, Range):
            lo, hi = _const_int(coll.lo), _const_int(coll.hi)
            if lo is not None and hi is not None:
                out[n] = IntType(lo, hi)
        elif isinstance(coll, SetLit) and coll.items and all(
                isinstance(i, Name) and i.name in elements for i in coll.items):
            owners = {elements[i.name] for i in coll.items}
            if len(owners) == 1:
                s = owners.pop()
                out[n] = EnumType(s, tuple(sets[s]))
    return out


def build_machine(raw: RawMachine) -> Machine:
    diags: list[tuple[type, Diagnostic]] = []

    def err(cls, msg, line=0, col=0):
        diags.append((cls, Diagnostic(line, col, cls.kind, msg)))

    sets: dict[str, list[str]] = {}
    elements: dict[str, str] = {}
    for name, elems, line, col in raw.sets:
        if name in sets:
            err(DuplicateName, f"set {name} declared twice", line, col)
        sets[name] = elems
        for e in elems:
            if e in elements:
                err(DuplicateName, f"element {e} declared twice", line, col)
            elements.setdefault(e, name)
    var_names: list[str] = []
    for name, line, col in raw.variables:
        if name in var_names:
            err(DuplicateName, f"variable {name} declared twice", line, col)
        elif name in elements or name in sets:
            err(DuplicateName, f"variable {name} clashes with a set or element", line, col)
        else:
            var_names.append(name)

    inv = raw.invariant if raw.invariant is not None else BoolLit(True)
    inv_pos = raw.positions.get("INVARIANT", (0, 0))
    vtypes = _infer_types(conjuncts(inv), set(var_names), sets, elements)
    variables = []
    for name, line, col in raw.variables:
        if name not in var_names:
            continue
        if name not in vtypes:
            err(TypeMismatch, f"no typing conjunct for variable {name}", line, col)
            vtypes[name] = IntType(0, 0)
        variables.append(Variable(name, vtypes[name]))

    init_pos = raw.positions.get("INITIALISATION", (0, 0))
    init_blocks = []
    for block in raw.init or [[]]:
        seen = set()
        for a in block:
            if a.target not in var_names:
                err(UnknownIdentifier, f"assignment to unknown variable {a.target}", a.line, a.col)
            elif a.target in seen:
                err(DuplicateName, f"variable {a.target} initialised twice", a.line, a.col)
            seen.add(a.target)
        for n in var_names:
            if n not in seen:
                err(TypeMismatch, f"variable {n} is not initialised", *init_pos)
        init_blocks.append(tuple(Assignment(a.target, a.expr) for a in block))

    operations = []
    op_names = set()
    for rop in raw.operations:
        if rop.name in op_names:
            err(DuplicateName, f"operation {rop.name} declared twice", rop.line, rop.col)
        op_names.add(rop.name)
        ptypes = _infer_types(conjuncts(rop.guard), set(rop.params), sets, elements)
        params = []
        for pn in rop.params:
            if pn in var_names or pn in elements or pn in sets:
                err(DuplicateName, f"parameter {pn} of {rop.name} shadows a declaration",
                    rop.line, rop.col)
            t = ptypes.get(pn)
            if not isinstance(t, EnumType):
                err(TypeMismatch, f"parameter {pn} of {rop.name} needs a typing conjunct "
                    f"'{pn} : SET'", rop.line, rop.col)
                t = EnumType("?", ())
            params.append((pn, t.name))
        if len(set(rop.params)) != len(rop.params):
            err(DuplicateName, f"repeated parameter in {rop.name}", rop.line, rop.col)
        seen = set()
        for a in rop.effects:
            if a.target not in var_names:
                err(UnknownIdentifier, f"assignment to unknown variable {a.target}", a.line, a.col)
            elif a.target in seen:
                err(DuplicateName, f"variable {a.target} assigned twice in {rop.name}",
                    a.line, a.col)
            seen.add(a.target)
        operations.append(Operation(rop.name, tuple(params), rop.guard,
                                    tuple(Assignment(a.target, a.expr) for a in rop.effects)))

    m = Machine(raw.name, raw.kind, raw.refines,
                tuple((k, tuple(v)) for k, v in sets.items()), tuple(variables), inv,
                tuple(init_blocks), tuple(operations))

    if not diags:
        def typed(fn, line, col):
            try:
                fn()
            except ModelError as e:
                err(type(e), str(e).split(": ", 2)[-1], line, col)

        typed(lambda: _check_pred(inv, _Env(m, {})), *inv_pos)
        for block in m.init:
            for a in block:
                typed(lambda a=a: _check_assign(m, a, {}), *init_pos)
        for rop, op in zip(raw.operations, operations):
            env_params = dict(op.params)
            typed(lambda op=op, e=env_params: _check_pred(op.guard, _Env(m, e)), rop.line, rop.col)
            for ra, a in zip(rop.effects, op.effects):
                typed(lambda a=a, e=env_params: _check_assign(m, a, e), ra.line, ra.col)

    if diags:
        diags.sort(key=lambda d: (d[1].line, d[1].column))
        raise diags[0][0](diags[0][1].message, diagnostics=[d for _, d in diags])
    return m


def _check_assign(m: Machine, a: Assignment, params: dict) -> None:
    env = _Env(m, params)
    t = _expr_type(a.expr, env)
    vt = env.vars[a.target]
    want = vt.name if isinstance(vt, EnumType) else INT
    if t != want:
        raise TypeMismatch(f"cannot assign {show_expr(a.expr)} to {a.target}")


def parse_machine(text: str) -> Machine:
    """Parse and check machine source text."""
    return build_machine(parse_raw_machine(text))


def load_machine(path) -> Machine:
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())


# ------------------------------------------------------------------- printing

def _show_block(block) -> str:
    if not block:
        return "skip"
    return " || ".join(f"{a.target} := {show_expr(a.expr)}" for a in block)


def print_machine(m: Machine) -> str:
    lines = [f"{m.kind} {m.name}"]
    if m.refines:
        lines.append(f"REFINES {m.refines}")
    if m.enum_sets:
        lines.append("SETS")
        sets = [f"  {n} = {{{', '.join(els)}}}" for n, els in m.enum_sets]
        lines.append(";\n".join(sets))
    if m.variables:
        lines.append("VARIABLES " + ", ".join(m.var_names))
    lines.append("INVARIANT")
    lines.append("  " + show_pred(m.invariant))
    lines.append("INITIALISATION")
    if len(m.init) == 1:
        lines.append("  " + _show_block(m.init[0]))
    else:
        lines.append("  CHOICE " + " OR ".join(_show_block(b) for b in m.init) + " END")
    lines.append("OPERATIONS")
    ops = []
    for op in m.operations:
        head = op.name + (f"({', '.join(op.param_names)})" if op.params else "")
        ops.append(f"  {head} = SELECT {show_pred(op.guard)} THEN {_show_block(op.effects)} END")
    if ops:
        lines.append(";\n".join(ops))
    lines.append("END")
    return "\n".join(lines) + "\n"
