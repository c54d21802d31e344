"""Discrete-event simulation of a machine under an activation configuration.

The evolution between two random decisions (a choice activation, or an
operation with several enabled bindings) is deterministic. Such stretches
are computed once per configuration (state, pending queue relative to the
current time, activations still to schedule) and cached as segments, so
Monte Carlo runs reduce to random walks over a small segment graph.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..errors import SimConfigError, UnknownActivation
from ..model.machine import INIT, Label, Machine, compile_pred, initial_states, successors
from .config import INIT_ACTIVATION, ChoiceActivation, SimConfig


@dataclass(frozen=True)
class Condition:
    """Start/end condition: ("PRED", pred) | ("TIME", ms) | ("STEPS", n)."""
    kind: str
    value: object


@dataclass(frozen=True)
class TimedEvent:
    time: int
    label: Label
    state: object


@dataclass
class TimedTrace:
    events: list = field(default_factory=list)
    blocked: int = 0  # guard-blocked activations that were skipped
    stalled: bool = False  # ran out of activations before the end condition
    started: bool = True  # the start condition was reached


@dataclass
class RunSet:
    runs: list
    seeds: list
    config_digest: str
    machine: Machine = None

    def to_csv(self) -> str:
        rows = ["run,time,op"]
        for i, run in enumerate(self.runs):
            for ev in run.events:
                rows.append(f"{i},{ev.time},{ev.label}")
        return "\n".join(rows) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode()).hexdigest()


def run_seed(master: int, index: int) -> int:
    """Per-run seed derived from the master seed and the run index."""
    h = hashlib.blake2b(f"{master}/{index}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def config_digest(cfg: SimConfig) -> str:
    return hashlib.sha256(repr(cfg).encode()).hexdigest()[:16]


SEGMENT_EVENTS = 64
# a window that never reaches its end condition (e.g. events that take no
# time) is cut off with an error after this many events
MAX_WINDOW_EVENTS = 1_000_000


class _Seg:
    __slots__ = ("events", "advance", "decision", "end", "next", "blocked", "fires")

    def __init__(self, events, advance, decision, end, blocked):
        self.events = events  # tuple of (t_rel, label, state, pre_enabled_op_indices)
        self.advance = advance
        # None (stall) | ("choice", cum, targets) | ("bind", k) | ("step",)
        self.decision = decision
        self.end = end
        if decision is None:
            width = 0
        elif decision[0] == "choice":
            width = len(decision[1])
        elif decision[0] == "bind":
            width = decision[1]
        else:
            width = 1
        self.next = [None] * width
        self.blocked = blocked
        self.fires = len(events)


class Engine:
    def __init__(self, m: Machine, cfg: SimConfig):
        self.m = m
        self.cfg = cfg
        self.acts = cfg.by_id
        self.op_index = {op.name: i for i, op in enumerate(m.operations)}
        for a in cfg.activations:
            if isinstance(a, ChoiceActivation) or a.execute == INIT_ACTIVATION:
                continue
            if a.execute not in self.op_index:
                raise SimConfigError(f"activation {a.id} executes unknown operation {a.execute}")
        self.cache: dict = {}
        self.start = self._segment((None, ((0, 0, INIT_ACTIVATION),), (), None))

    # a config is (state, queue, pending, forced) with queue entries
    # (relative time, rank, activation id) sorted by (time, rank)
    def _segment(self, config) -> _Seg:
        seg = self.cache.get(config)
        if seg is None:
            seg = self.cache[config] = self._compute(config)
        return seg

    def _options(self, state, act):
        if act.execute == INIT_ACTIVATION:
            return [(INIT, s) for s in initial_states(self.m)]
        return [(lab, s) for lab, s in successors(self.m, state) if lab.op == act.execute]

    def _enabled(self, state) -> tuple:
        if state is None:
            return ()
        return tuple(sorted({self.op_index[lab.op] for lab, _ in successors(self.m, state)}))

    def _compute(self, config) -> _Seg:
        state, queue, pending, forced = config
        queue = list(queue)
        seq = len(queue)
        now = 0
        events = []
        blocked = 0
        while True:
            while pending:
                aid = pending[0]
                act = self.acts[aid]
                if isinstance(act, ChoiceActivation):
                    cum, acc = [], 0
                    for _t, p in act.choices:
                        acc += p
                        cum.append(float(acc))
                    end = (state, _norm(queue, now), pending, None)
                    return _Seg(tuple(events), now,
                                ("choice", tuple(cum), tuple(t for t, _ in act.choices)),
                                end, blocked)
                queue.append((now + act.after, seq, aid))
                seq += 1
                queue.sort()
                pending = pending[1:]
            if not queue:
                return _Seg(tuple(events), now, None, None, blocked)
            t, _rank, aid = queue[0]
            act = self.acts[aid]
            opts = self._options(state, act)
            if not opts:
                queue.pop(0)
                now = t
                blocked += 1
                continue
            if len(opts) > 1 and forced is None:
                end = (state, _norm(queue, now), (), None)
                return _Seg(tuple(events), now, ("bind", len(opts)), end, blocked)
            queue.pop(0)
            now = t
            label, new = opts[forced or 0]
            forced = None
            events.append((now, label, new, self._enabled(state)))
            state = new
            pending = act.activating
            if len(events) >= SEGMENT_EVENTS:
                # cut long deterministic stretches so periodic configs hit the cache
                end = (state, _norm(queue, now), pending, None)
                return _Seg(tuple(events), now, ("step",), end, blocked)

    def follow(self, seg: _Seg, idx: int) -> _Seg:
        nxt = seg.next[idx]
        if nxt is None:
            state, queue, pending, _ = seg.end
            if seg.decision[0] == "choice":
                cfg = (state, queue, (seg.decision[2][idx],) + pending[1:], None)
            elif seg.decision[0] == "step":
                cfg = seg.end
            else:
                cfg = (state, queue, (), idx)
            nxt = seg.next[idx] = self._segment(cfg)
        return nxt

    @staticmethod
    def draw(rng: random.Random, decision) -> int:
        if decision[0] == "choice":
            u = rng.random()
            cum = decision[1]
            for i, c in enumerate(cum):
                if u < c:
                    return i
            return len(cum) - 1
        if decision[0] == "step":
            return 0
        return rng.randrange(decision[1])

    def events(self, rng: random.Random, info: dict | None = None):
        """Infinite-or-stalling stream of (time, label, state, pre_enabled)."""
        seg = self.start
        base = 0
        while True:
            for t, label, st, pre in seg.events:
                yield base + t, label, st, pre
            if info is not None:
                info["blocked"] = info.get("blocked", 0) + seg.blocked
            base += seg.advance
            if seg.decision is None:
                if info is not None:
                    info["stalled"] = True
                return
            seg = self.follow(seg, self.draw(rng, seg.decision))


def _norm(queue, now) -> tuple:
    return tuple((t - now, i, aid) for i, (t, _r, aid) in enumerate(sorted(queue)))


_ENGINES: dict = {}


def get_engine(m: Machine, cfg: SimConfig) -> Engine:
    key = (id(m), cfg)
    eng = _ENGINES.get(key)
    if eng is None or eng.m is not m:
        eng = _ENGINES[key] = Engine(m, cfg)
    return eng


MAX_START_EVENTS = 100_000


def simulate(m: Machine, cfg: SimConfig, seed: int, stop: Condition) -> TimedTrace:
    """One run from time 0 until ``stop`` (TIME: up to time t, STEPS: n firings)."""
    eng = get_engine(m, cfg)
    rng = random.Random(seed)
    info: dict = {}
    out = TimedTrace()
    fired = -1  # the initialisation does not count as a step
    for time, label, st, _pre in eng.events(rng, info):
        if stop.kind == "TIME" and time > stop.value:
            break
        if stop.kind == "STEPS" and fired >= stop.value:
            break
        out.events.append(TimedEvent(time, label, st))
        fired += 1
        if fired > MAX_WINDOW_EVENTS:
            raise SimConfigError(f"run exceeded {MAX_WINDOW_EVENTS} events before its end "
                                 "condition (do activations take no time?)")
    else:
        out.stalled = bool(info.get("stalled"))
    out.blocked = info.get("blocked", 0)
    return out


def _start_test(m: Machine, cond: Condition):
    if cond.kind == "PRED":
        fn = compile_pred(m, cond.value, {})
        return lambda time, n, st: bool(fn(st.values, ()))
    if cond.kind == "TIME":
        return lambda time, n, st: time >= cond.value
    if cond.kind == "STEPS":
        return lambda time, n, st: n >= cond.value
    raise SimConfigError(f"unknown start condition {cond.kind}")


def windowed_run(eng: Engine, rng: random.Random, start: Condition, end: Condition) -> TimedTrace:
    """Events from the first one satisfying ``start`` until ``end``.

    The first recorded event is the one at which the start condition holds;
    the window clock and step count start there.
    """
    test = _start_test(eng.m, start)
    info: dict = {}
    out = TimedTrace(started=False)
    t0 = None
    steps = 0
    for n, (time, label, st, _pre) in enumerate(eng.events(rng, info)):
        if t0 is None:
            if n > MAX_START_EVENTS:
                break
            if test(time, n, st):
                t0 = time
                out.started = True
                out.events.append(TimedEvent(time, label, st))
            continue
        if end.kind == "TIME" and time > t0 + end.value:
            break
        if end.kind == "STEPS" and steps >= end.value:
            break
        out.events.append(TimedEvent(time, label, st))
        steps += 1
        if steps > MAX_WINDOW_EVENTS:
            raise SimConfigError(f"run exceeded {MAX_WINDOW_EVENTS} events before its end "
                                 "condition (do activations take no time?)")
    else:
        out.stalled = bool(info.get("stalled"))
    out.blocked = info.get("blocked", 0)
    return out


def monte_carlo(m: Machine, cfg: SimConfig, n: int, start: Condition, end: Condition,
                master_seed: int) -> RunSet:
    eng = get_engine(m, cfg)
    seeds = [run_seed(master_seed, i) for i in range(n)]
    runs = [windowed_run(eng, random.Random(s), start, end) for s in seeds]
    return RunSet(runs, seeds, config_digest(cfg), m)


def aggregate_statistics(m: Machine, cfg: SimConfig, n: int, start: Condition, end: Condition,
                         master_seed: int) -> dict:
    """Enabled/executed counts over ``n`` windowed runs without storing them.

    Produces the same numbers as ``simulation_statistics(monte_carlo(...))``
    for STEPS end conditions; other end conditions fall back to full runs.
    """
    from .stats import simulation_statistics
    if end.kind != "STEPS":
        return simulation_statistics(monte_carlo(m, cfg, n, start, end, master_seed))
    eng = get_engine(m, cfg)
    test = _start_test(m, start)
    nops = len(m.operations)
    enabled = [0] * nops
    executed = [0] * nops
    whole: dict = {}  # segment -> number of complete traversals inside windows
    limit = end.value
    follow, draw = eng.follow, eng.draw

    def count(ev):
        for i in ev[3]:
            enabled[i] += 1
        if ev[1].op in eng.op_index:
            executed[eng.op_index[ev[1].op]] += 1

    for r in range(n):
        rng = random.Random(run_seed(master_seed, r))
        seg = eng.start
        base = 0
        idx = 0
        n_ev = 0
        started = False
        # locate the start event
        while not started:
            evs = seg.events
            while idx < len(evs):
                t, _lab, st, _pre = evs[idx]
                idx += 1
                if test(base + t, n_ev, st):
                    started = True
                    break
                n_ev += 1
                if n_ev > MAX_START_EVENTS:
                    break
            if started or n_ev > MAX_START_EVENTS:
                break
            if seg.decision is None:
                break
            base += seg.advance
            seg = follow(seg, draw(rng, seg.decision))
            idx = 0
        if not started:
            continue
        remaining = limit
        # rest of the current segment
        evs = seg.events
        while idx < len(evs) and remaining > 0:
            count(evs[idx])
            idx += 1
            remaining -= 1
        if remaining <= 0 or seg.decision is None:
            continue
        seg = follow(seg, draw(rng, seg.decision))
        while True:
            if seg.fires >= remaining:
                for ev in seg.events[:remaining]:
                    count(ev)
                break
            whole[seg] = whole.get(seg, 0) + 1
            remaining -= seg.fires
            if seg.decision is None:
                break
            seg = follow(seg, draw(rng, seg.decision))
    for seg, times in whole.items():
        for ev in seg.events:
            for i in ev[3]:
                enabled[i] += times
            if ev[1].op in eng.op_index:
                executed[eng.op_index[ev[1].op]] += times
    out = {}
    for i, op in enumerate(m.operations):
        out[("enabled", op.name)] = enabled[i]
        out[("executed", op.name)] = executed[i]
    return out


__all__ = ["Condition", "TimedEvent", "TimedTrace", "RunSet", "Engine", "simulate",
           "monte_carlo", "windowed_run", "aggregate_statistics", "run_seed",
           "UnknownActivation"]
