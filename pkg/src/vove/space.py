"""State spaces, traces, validation sessions and the inspection artefacts."""

from __future__ import annotations

import copy
from collections import Counter, deque
from dataclasses import dataclass, field

from .errors import LimitExceeded, SemanticsError
from .model.ast import names_in
from .model.machine import (INIT, ROOT, IntType, Label, Machine, State, compile_expr,
                            initial_states, successors)

DEFAULT_LIMIT = 100_000


class StateSpace:
    """Rooted labelled transition graph, grown incrementally.

    Nodes keep discovery order, edges keep insertion order; both orders are
    deterministic so every derived artefact is reproducible.
    """

    def __init__(self, machine: Machine):
        self.machine = machine
        self.nodes: dict = {ROOT: None}
        self.edges: dict = {}  # (src, label, dst) -> None, an ordered set
        self.out: dict = {ROOT: []}
        self.expanded: set = set()

    # ---------------------------------------------------------------- growth
    def add_node(self, node) -> bool:
        if node in self.nodes:
            return False
        self.nodes[node] = None
        self.out[node] = []
        return True

    def add_edge(self, src, label: Label, dst) -> None:
        self.add_node(src)
        self.add_node(dst)
        key = (src, label, dst)
        if key not in self.edges:
            self.edges[key] = None
            self.out[src].append((label, dst))

    def successors_of(self, node) -> list[tuple[Label, object]]:
        """Successors computed from the machine, not from the stored edges."""
        if node is ROOT:
            return [(INIT, s) for s in initial_states(self.machine)]
        return successors(self.machine, node)

    def expand(self, node) -> list:
        """Add every outgoing edge of ``node``; returns newly discovered nodes."""
        new = []
        for label, dst in self.successors_of(node):
            if dst not in self.nodes:
                new.append(dst)
            self.add_edge(node, label, dst)
        self.expanded.add(node)
        return new

    def explore(self, limit: int = DEFAULT_LIMIT, order=None) -> "StateSpace":
        """Breadth-first exploration of all unexpanded nodes.

        ``limit`` bounds the number of nodes (root included). When it would be
        exceeded, LimitExceeded is raised and the partial space is kept.
        ``order`` optionally permutes the worklist and successor lists.
        """
        if limit < 1:
            raise ValueError("limit must be at least 1")
        queue = deque(n for n in self.nodes if n not in self.expanded)
        if order is not None:
            queue = deque(order(list(queue)))
        while queue:
            node = queue.popleft()
            if node in self.expanded:
                continue
            succ = self.successors_of(node)
            if order is not None:
                succ = order(list(succ))
            fresh = {dst: None for _, dst in succ if dst not in self.nodes}
            if len(self.nodes) + len(fresh) > limit:
                raise LimitExceeded(f"state limit {limit} exceeded "
                                    f"({len(self.nodes)} states explored)")
            for label, dst in succ:
                self.add_edge(node, label, dst)
            self.expanded.add(node)
            queue.extend(fresh)
        return self

    @property
    def frontier(self) -> list:
        return [n for n in self.nodes if n not in self.expanded]

    @property
    def complete(self) -> bool:
        return len(self.expanded) == len(self.nodes)

    # --------------------------------------------------------------- queries
    @property
    def states(self) -> list[State]:
        return [n for n in self.nodes if n is not ROOT]

    def deadlocks(self) -> list[State]:
        return [s for s in self.states if not self.successors_of(s)]

    def shortest_path(self, goal, start=ROOT) -> "Path | None":
        """Shortest stored path from ``start`` to a node satisfying ``goal``.

        Ties are broken by edge insertion order.
        """
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node is not ROOT and goal(node):
                steps = []
                while parent[node] is not None:
                    prev, label = parent[node]
                    steps.append((label, node))
                    node = prev
                steps.reverse()
                return Path(start, steps)
            for label, dst in self.out.get(node, ()):
                if dst not in parent:
                    parent[dst] = (node, label)
                    queue.append(dst)
        return None

    def shortest_paths_to_edges(self, want) -> dict:
        """For each op name in ``want``, a shortest path whose last step is that op."""
        found: dict = {}
        parent = {ROOT: None}
        queue = deque([ROOT])

        def path_to(node):
            steps = []
            while parent[node] is not None:
                prev, label = parent[node]
                steps.append((label, node))
                node = prev
            steps.reverse()
            return steps

        while queue and len(found) < len(want):
            node = queue.popleft()
            for label, dst in self.out.get(node, ()):
                if label.op in want and label.op not in found:
                    found[label.op] = Path(ROOT, path_to(node) + [(label, dst)])
                if dst not in parent:
                    parent[dst] = (node, label)
                    queue.append(dst)
        return found

    def copy(self) -> "StateSpace":
        other = StateSpace.__new__(StateSpace)
        other.machine = self.machine
        other.nodes = dict(self.nodes)
        other.edges = dict(self.edges)
        other.out = {k: list(v) for k, v in self.out.items()}
        other.expanded = set(self.expanded)
        return other

    def merge(self, other: "StateSpace") -> None:
        for n in other.nodes:
            self.add_node(n)
        for (src, label, dst) in other.edges:
            self.add_edge(src, label, dst)
        self.expanded |= other.expanded


@dataclass
class Path:
    """A concrete executed path: start node plus (label, reached state) steps."""
    start: object
    steps: list = field(default_factory=list)

    @property
    def last(self):
        return self.steps[-1][1] if self.steps else self.start

    @property
    def states(self) -> list:
        return [self.start] + [s for _, s in self.steps]

    def show(self) -> str:
        parts = [self.start.show()]
        for label, st in self.steps:
            parts.append(f"-{label}-> {st.show()}")
        return " ".join(parts)


@dataclass(frozen=True)
class TraceStep:
    op: str
    binding: tuple = ()  # ((param, value), ...)
    post: object = None  # optional postcondition predicate


@dataclass
class Trace:
    """A replayable scenario.

    ``origin`` is ``"root"`` (start before initialisation), ``"current"``
    (continue from the session's current trace) or an explicit State.
    """
    steps: list
    origin: object = "current"


# ------------------------------------------------------------------ sessions

@dataclass
class ValidationSession:
    machine: Machine
    space: StateSpace = None
    current_trace: Path | None = None
    visit_counts: Counter = field(default_factory=Counter)
    run_set: object = None
    limit: int = DEFAULT_LIMIT
    artifacts: dict = field(default_factory=dict)  # e.g. the sim config

    def __post_init__(self):
        if self.space is None:
            self.space = StateSpace(self.machine)

    def clone(self) -> "ValidationSession":
        return ValidationSession(self.machine, self.space.copy(),
                                 copy.copy(self.current_trace), Counter(self.visit_counts),
                                 self.run_set, self.limit, dict(self.artifacts))

    @property
    def value_sets(self) -> dict[str, set]:
        out = {n: set() for n in self.machine.var_names}
        for s in self.space.states:
            for n, v in zip(s.names, s.values):
                out[n].add(v)
        return out

    def record(self, path: Path) -> None:
        """Add an executed path to the space and the visit statistics."""
        node = path.start
        self.space.add_node(node)
        for label, st in path.steps:
            self.space.add_edge(node, label, st)
            self.visit_counts[label.op] += 1
            node = st
        self.current_trace = path

    def explore(self, order=None) -> StateSpace:
        return self.space.explore(self.limit, order)


# --------------------------------------------------------- inspection artefacts

STAT_KEYS = ("Number of States", "Number of Transitions", "Deadlocked States",
             "Unexplored States")


def statistics(space: StateSpace) -> dict:
    """State-space statistics; per-operation transition counts follow the totals."""
    per_op = Counter(label.op for (_, label, _) in space.edges)
    out = {
        "Number of States": len(space.nodes),
        "Number of Transitions": len(space.edges),
        "Deadlocked States": len(space.deadlocks()),
        "Unexplored States": len(space.frontier),
        "INITIALISATION": per_op.get("INITIALISATION", 0),
    }
    for op in space.machine.operations:
        out[op.name] = per_op.get(op.name, 0)
    return out


@dataclass
class ProjectedGraph:
    expr: str
    nodes: list  # distinct values, first-seen order
    init_values: list  # targets of the INITIALISATION edges
    edges: list  # (value, Label, value)

    def relation(self) -> list:
        """Edges as stored in formulas: init edges as pairs, others as triples."""
        return ([("INITIALISATION", v) for v in self.init_values]
                + [(a, lab, b) for a, lab, b in self.edges])


def project(space: StateSpace, expr, text: str = "") -> ProjectedGraph:
    """Quotient of the explored space by the value of ``expr``."""
    if not space.complete:
        raise SemanticsError("projection needs a completely explored state space")
    fn = compile_expr(space.machine, expr)
    val = {s: fn(s.values) for s in space.states}
    nodes = list(dict.fromkeys(val[s] for s in space.states))
    inits: dict = {}
    edges: dict = {}
    for src, label, dst in space.edges:
        if src is ROOT:
            inits[val[dst]] = None
        else:
            edges[(val[src], label, val[dst])] = None
    return ProjectedGraph(text, nodes, list(inits), list(edges))


def enabling_relation(space: StateSpace) -> list[tuple[str, str]]:
    """Pairs (e1, e2) such that e2 is enabled right after some e1 firing."""
    if not space.complete:
        raise SemanticsError("the enabling relation needs a completely explored state space")
    out: dict = {}
    for src, label, dst in space.edges:
        if src is ROOT:
            continue
        for l2, _ in space.successors_of(dst):
            out[(label.op, l2.op)] = None
    return list(out)


def read_write_matrix(m: Machine) -> list[tuple[str, tuple[str, str]]]:
    """Static READ/WRITE relation between operations and variables."""
    out: dict = {}
    varset = set(m.var_names)
    for op in m.operations:
        read = names_in(op.guard)
        for a in op.effects:
            read |= names_in(a.expr)
        for v in m.var_names:
            if v in read:
                out[("READ", (op.name, v))] = None
        written = {a.target for a in op.effects}
        for v in m.var_names:
            if v in written and v in varset:
                out[("WRITE", (op.name, v))] = None
    return list(out)


def variable_coverage(session: ValidationSession) -> dict[str, int]:
    return {n: len(vs) for n, vs in session.value_sets.items()}


def operation_coverage(session: ValidationSession) -> dict[str, str]:
    used = {label.op for (_, label, _) in session.space.edges} | {
        op for op, c in session.visit_counts.items() if c > 0}
    return {op.name: "COVERED" if op.name in used else "UNCOVERED"
            for op in session.machine.operations}


def min_max(session: ValidationSession) -> dict[str, tuple[int, int]]:
    out = {}
    vs = session.value_sets
    for v in session.machine.variables:
        if isinstance(v.type, IntType) and vs[v.name]:
            out[v.name] = (min(vs[v.name]), max(vs[v.name]))
    return out


# ------------------------------------------------------------------- export

def _dot_id(i: int) -> str:
    return f"n{i}"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(graph, name: str = "statespace") -> str:
    """Graphviz text for a StateSpace or a ProjectedGraph."""
    lines = [f'digraph "{_esc(name)}" {{']
    if isinstance(graph, ProjectedGraph):
        ids = {"<root>": "root"}
        lines.append('  root [label="root", shape=point];')
        for i, v in enumerate(graph.nodes):
            ids[v] = _dot_id(i)
            lines.append(f'  {_dot_id(i)} [label="{_esc(str(v))}"];')
        for v in graph.init_values:
            lines.append(f'  root -> {ids[v]} [label="INITIALISATION"];')
        for a, lab, b in graph.edges:
            lines.append(f'  {ids[a]} -> {ids[b]} [label="{_esc(str(lab))}"];')
    else:
        ids = {}
        for i, n in enumerate(graph.nodes):
            ids[n] = "root" if n is ROOT else _dot_id(i)
            if n is ROOT:
                lines.append('  root [label="root", shape=point];')
            else:
                text = "\\n".join(_esc(f"{k}={v}") for k, v in zip(n.names, n.values))
                lines.append(f'  {ids[n]} [label="{text}"];')
        for src, lab, dst in graph.edges:
            lines.append(f'  {ids[src]} -> {ids[dst]} [label="{_esc(str(lab))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def table_csv(table: dict) -> str:
    rows = ["key,value"]
    for k, v in table.items():
        rows.append(f"{_csv(k)},{_csv(v)}")
    return "\n".join(rows) + "\n"


def _csv(x) -> str:
    s = str(x)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s
