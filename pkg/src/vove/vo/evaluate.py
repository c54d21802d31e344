"""Evaluation of obligations against validation sessions.

Each obligation starts from fresh sessions, one per machine. ``;`` threads
the sessions from left to right; the other connectives run both operands
on clones of the incoming sessions and continue with the union of what
the two branches produced.
"""

from __future__ import annotations

import hashlib
import time
from collections import Counter
from dataclasses import dataclass, field

from ..check.ctl import check_ctl
from ..check.explicit import check_explicit
from ..check.ltl import check_ltl
from ..check.replay import replay_trace
from ..check.testgen import gen_mcdc, gen_op_coverage
from ..check.vacuity import vacuous_parts
from ..check.verdict import ERROR, FAIL, SUCCESS, Verdict
from ..errors import LimitExceeded, VoveError
from ..query import holds, label_value, mapping, relation
from ..sim.engine import aggregate_statistics, monte_carlo
from ..sim.stats import estimate_probability, hypothesis_test
from ..space import (DEFAULT_LIMIT, Trace, ValidationSession, enabling_relation,
                     operation_coverage, project, read_write_matrix, statistics,
                     variable_coverage)
from .checker import STRICT, check_vo, needs_auto_explore
from .expr import BinVo, Leaf, NotVo, leaves

SKIPPED = "SKIPPED"


@dataclass
class Env:
    """Loaded artifacts and evaluation settings."""
    machines: dict
    sims: dict = field(default_factory=dict)
    limit: int = DEFAULT_LIMIT
    runs: int = 1000
    seed: int = 0
    mode: str = STRICT


class SessionGroup:
    """One validation session per machine, plus the history that produced them."""

    def __init__(self, env: Env, sessions: dict | None = None, lineage: str = ""):
        self.env = env
        self.sessions = sessions if sessions is not None else {}
        self.lineage = lineage

    def session(self, name: str) -> ValidationSession:
        s = self.sessions.get(name)
        if s is None:
            s = self.sessions[name] = ValidationSession(self.env.machines[name],
                                                        limit=self.env.limit)
        return s

    def clone(self) -> "SessionGroup":
        return SessionGroup(self.env, {k: s.clone() for k, s in self.sessions.items()},
                            self.lineage)


def merge_groups(base: SessionGroup, a: SessionGroup, b: SessionGroup) -> SessionGroup:
    """Union of two branches that both started from ``base``."""
    out = {}
    for name in dict.fromkeys(list(a.sessions) + list(b.sessions)):
        sa, sb = a.sessions.get(name), b.sessions.get(name)
        if sa is None or sb is None:
            out[name] = (sa or sb).clone()
            continue
        s = sa.clone()
        s.space.merge(sb.space)
        start = base.sessions[name].visit_counts if name in base.sessions else Counter()
        s.visit_counts = sa.visit_counts + sb.visit_counts - start
        if sb.current_trace is not None:
            s.current_trace = sb.current_trace
        if sb.run_set is not None:
            s.run_set = sb.run_set
        out[name] = s
    return SessionGroup(base.env, out, f"({a.lineage})+({b.lineage})")


@dataclass
class Outcome:
    """Evaluation tree node."""
    expr: object
    status: str
    children: list = field(default_factory=list)
    verdict: Verdict | None = None
    reused: bool = False

    @property
    def task(self) -> str:
        return self.expr.id if isinstance(self.expr, Leaf) else ""


@dataclass
class VoResult:
    vo: object
    status: str
    outcome: Outcome | None
    blame: list
    diagnostics: list
    elapsed: float = 0.0

    @property
    def id(self) -> str:
        return self.vo.id


def task_seed(master: int, task_id: str) -> int:
    h = hashlib.blake2b(f"{master}/{task_id}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def combine(op: str, a: str, b: str) -> str:
    """Three-valued connectives: any ERROR operand gives ERROR."""
    if ERROR in (a, b):
        return ERROR
    x, y = a == SUCCESS, b == SUCCESS
    value = {"and": x and y, "or": x or y, "implies": (not x) or y, "iff": x == y}[op]
    return SUCCESS if value else FAIL


def negate(a: str) -> str:
    return {SUCCESS: FAIL, FAIL: SUCCESS}.get(a, ERROR)


# ------------------------------------------------------------- task dispatch

def inspection_bindings(technique: str, s: ValidationSession) -> dict:
    space = s.space
    if technique == "STAT":
        return {"R_spstat": mapping(statistics(space))}
    if technique == "SVIS":
        return {"Z_svis": frozenset(space.nodes),
                "T_svis": frozenset(((a, label_value(lab)), b) for a, lab, b in space.edges)}
    if technique == "ED":
        return {"R_ed": relation(enabling_relation(space))}
    if technique == "OCT":
        return {"R_oct": mapping(operation_coverage(s))}
    if technique == "RWM":
        return {"R_rwm": relation(read_write_matrix(s.machine))}
    if technique == "VCT":
        return {"R_vct": mapping(variable_coverage(s))}
    if technique == "MMV":
        return {"R_mmv": mapping({k: frozenset(v) for k, v in s.value_sets.items()})}
    raise VoveError(f"no inspection data for {technique}")


def inspection_table(technique: str, s: ValidationSession):
    """Tabular evidence in model order; the query bindings are unordered sets."""
    if technique == "STAT":
        return _table(statistics(s.space))
    if technique == "VCT":
        return _table(variable_coverage(s))
    if technique == "OCT":
        return _table(operation_coverage(s))
    return None


def projection_bindings(s: ValidationSession, params) -> dict:
    pg = project(s.space, params.expr, params.name)
    nodes = frozenset(pg.nodes)
    edges = frozenset([("INITIALISATION", v) for v in pg.init_values]
                      + [((a, label_value(lab)), b) for a, lab, b in pg.edges])
    out = {"S": nodes, "T": edges}
    if params.name:
        out[f"S_{params.name}"] = nodes
        out[f"T_{params.name}"] = edges
    return out


def _table(d: dict) -> dict:
    return {(" ".join(k) if isinstance(k, tuple) else str(k)): v for k, v in d.items()}


def _query_verdict(query, bindings: dict, table=None) -> Verdict:
    ok = holds(query, bindings)
    return Verdict(SUCCESS if ok else FAIL, "formula holds" if ok else "formula does not hold",
                   table=table)


def run_task(vt, group: SessionGroup, auto_explore: bool = False) -> Verdict:
    """Run one task on the session of its machine (mutating it)."""
    env = group.env
    s = group.session(vt.machine)
    p = vt.params
    t = vt.technique
    try:
        if auto_explore:
            s.explore()
        if t == "TR":
            return replay_trace(s, Trace(list(p.steps), origin="current"))
        if t == "MC":
            return check_explicit(s, p)
        if t == "LTL":
            return check_ltl(s, p.formula, p.expected)
        if t == "CTL":
            return check_ctl(s, p.formula, p.expected)
        if t == "OC":
            return gen_op_coverage(s, list(p.ops))
        if t == "MCDC":
            return gen_mcdc(s, p)
        if t == "VAP":
            return vacuous_parts(s, p)
        if t == "SPRJ":
            return _query_verdict(p.query, projection_bindings(s, p))
        runs = env.runs if getattr(p, "runs", None) is None else p.runs
        if t in ("HT", "EOP"):
            h = p.hypothesis
            rs = monte_carlo(s.machine, env.sims[vt.sim], runs, h.start, h.end,
                             task_seed(env.seed, vt.id))
            s.run_set = rs
            if t == "HT":
                return hypothesis_test(rs, h, p.alpha)
            return estimate_probability(rs, h.prop, h.procedure, h.p0, p.delta)
        if t == "SISTAT":
            counts = aggregate_statistics(s.machine, env.sims[vt.sim], runs, p.start, p.end,
                                          task_seed(env.seed, vt.id))
            return _query_verdict(p.query, {"R_sistat": mapping(counts)}, _table(counts))
        return _query_verdict(p.query, inspection_bindings(t, s), inspection_table(t, s))
    except LimitExceeded as e:
        return Verdict(ERROR, str(e))
    except VoveError as e:
        return Verdict(ERROR, f"{type(e).__name__}: {e}")


# ---------------------------------------------------------------- evaluation

class Evaluator:
    def __init__(self, env: Env, vts: dict, requirements=None, vos=()):
        self.env = env
        self.vts = vts
        self.homes = home_requirements(vos)
        self.req_ids = None if requirements is None else {r.id for r in requirements}
        self.memo: dict = {}

    def evaluate(self, vo) -> VoResult:
        t0 = time.perf_counter()
        diags = check_vo(vo, self.vts, self.env.mode, self.req_ids)
        errors = [d for d in diags if d.kind == "error"]
        if errors:
            outcome = None
            status = ERROR
            blame = list(dict.fromkeys(leaves(vo.expr) + list(vo.validates)))
        else:
            outcome, _ = self._eval(vo.expr, SessionGroup(self.env), frozenset())
            status = outcome.status
            blame = trace_blame(vo, outcome, self.vts, self.homes)
        return VoResult(vo, status, outcome, blame, diags, time.perf_counter() - t0)

    def _eval(self, e, group: SessionGroup, before: frozenset):
        if isinstance(e, Leaf):
            return self._leaf(e, group, before)
        if isinstance(e, NotVo):
            inner, group = self._eval(e.operand, group, before)
            return Outcome(e, negate(inner.status), [inner]), group
        if e.op == "seq":
            left, group = self._eval(e.left, group, before)
            if left.status != SUCCESS:
                skipped = Outcome(e.right, SKIPPED)
                return Outcome(e, left.status, [left, skipped]), group
            right, group = self._eval(e.right, group, before | frozenset(leaves(e.left)))
            return Outcome(e, right.status, [left, right]), group
        left, ga = self._eval(e.left, group.clone(), before)
        right, gb = self._eval(e.right, group.clone(), before)
        return (Outcome(e, combine(e.op, left.status, right.status), [left, right]),
                merge_groups(group, ga, gb))

    def _leaf(self, e: Leaf, group: SessionGroup, before: frozenset):
        vt = self.vts[e.id]
        auto = self.env.mode != STRICT and needs_auto_explore(vt, before, self.vts)
        key = (vt.id, group.lineage, auto)
        hit = self.memo.get(key)
        if hit is not None:
            verdict, snapshot = hit
            return Outcome(e, verdict.status, verdict=verdict, reused=True), snapshot.clone()
        verdict = run_task(vt, group, auto)
        verdict.task_id = vt.id
        group.lineage = f"{group.lineage};{vt.id}" + ("!" if auto else "")
        self.memo[key] = (verdict, group.clone())
        return Outcome(e, verdict.status, verdict=verdict), group


# --------------------------------------------------------------------- blame

def _evaluated_leaves(o: Outcome) -> list[str]:
    if o.status == SKIPPED:
        return []
    if isinstance(o.expr, Leaf):
        return [o.expr.id]
    return [i for c in o.children for i in _evaluated_leaves(c)]


def culprits(o: Outcome) -> list[str]:
    """Leaf tasks that explain why ``o`` did not succeed."""
    if o.status in (SUCCESS, SKIPPED):
        return []
    e = o.expr
    if isinstance(e, Leaf):
        return [e.id]
    kids = o.children
    errs = [c for c in kids if c.status == ERROR]
    if errs:
        return [i for c in errs for i in culprits(c)]
    if isinstance(e, NotVo):
        return _evaluated_leaves(kids[0])
    if e.op in ("seq", "and", "or"):
        return [i for c in kids for i in culprits(c)]
    if e.op == "implies":
        return _evaluated_leaves(kids[0]) + culprits(kids[1])
    return _evaluated_leaves(kids[0]) + _evaluated_leaves(kids[1])


def home_requirements(vos) -> dict:
    """Requirements reached through each task's home obligations.

    A task's home obligations are those consisting of that task alone.
    """
    out: dict = {}
    for vo in vos:
        if isinstance(vo.expr, Leaf):
            out.setdefault(vo.expr.id, []).extend(vo.validates)
    return out


def trace_blame(vo, outcome: Outcome | None, vts: dict, homes: dict | None = None) -> list[str]:
    """Possible error sources of a failed obligation.

    These are the failing tasks, the requirements validated by the
    obligation and by the tasks' home obligations, and the models involved.
    """
    if outcome is None or outcome.status == SUCCESS:
        return []
    tasks = list(dict.fromkeys(culprits(outcome)))
    reqs = list(vo.validates) + [r for t in tasks for r in (homes or {}).get(t, ())]
    models = [c for t in tasks if t in vts for c in vts[t].context]
    return list(dict.fromkeys(tasks + reqs + models))


def task_outcomes(o: Outcome | None) -> list[Outcome]:
    """Leaf outcomes in evaluation order."""
    if o is None or o.status == SKIPPED:
        return []
    if isinstance(o.expr, Leaf):
        return [o]
    return [x for c in o.children for x in task_outcomes(c)]


def evaluate_vo(vo, env: Env, vts: dict, requirements=None, vos=()) -> VoResult:
    return Evaluator(env, vts, requirements, vos).evaluate(vo)
