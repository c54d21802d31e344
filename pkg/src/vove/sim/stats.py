"""Hypothesis testing, probability estimation and simulation statistics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from scipy.stats import binom

from ..check.verdict import ERROR, FAIL, SUCCESS, Verdict
from ..model.machine import compile_pred, successors
from .engine import Condition, RunSet

PROCEDURES = ("LEFT_TAILED", "RIGHT_TAILED", "TWO_TAILED")
PROPERTIES = ("EVENTUALLY", "ALWAYS")


@dataclass(frozen=True)
class Hypothesis:
    start: Condition
    end: Condition
    prop: tuple  # (kind, pred) with kind in PROPERTIES
    procedure: str
    p0: Fraction

    def __post_init__(self):
        if self.procedure not in PROCEDURES:
            raise ValueError(f"unknown procedure {self.procedure}")
        if self.prop[0] not in PROPERTIES:
            raise ValueError(f"unknown property kind {self.prop[0]}")


def run_satisfies(m, run, prop) -> bool:
    """Whether one windowed run satisfies ``prop``; runs that never started do not."""
    if not run.started or not run.events:
        return False
    fn = compile_pred(m, prop[1], {})
    hits = (bool(fn(ev.state.values, ())) for ev in run.events)
    return any(hits) if prop[0] == "EVENTUALLY" else all(hits)


def success_count(rs: RunSet, prop) -> int:
    return sum(run_satisfies(rs.machine, run, prop) for run in rs.runs)


def binomial_reject(k: int, n: int, p0: float, alpha: float, procedure: str) -> bool:
    """Exact binomial test of H: p >= p0 (left), p <= p0 (right) or p = p0 (two-sided)."""
    low = binom.cdf(k, n, p0)
    high = binom.sf(k - 1, n, p0)
    if procedure == "LEFT_TAILED":
        return low < alpha
    if procedure == "RIGHT_TAILED":
        return high < alpha
    return 2 * min(low, high) < alpha


def hypothesis_test(rs: RunSet, h: Hypothesis, alpha) -> Verdict:
    n = len(rs.runs)
    if n == 0:
        return Verdict(ERROR, "empty run set")
    k = success_count(rs, h.prop)
    rejected = binomial_reject(k, n, float(h.p0), float(alpha), h.procedure)
    msg = (f"{k}/{n} runs satisfy the property; H0 ({h.procedure}, p0={h.p0}) "
           f"{'rejected' if rejected else 'accepted'} at alpha={alpha}")
    return Verdict(FAIL if rejected else SUCCESS, msg)


def estimate_probability(rs: RunSet, prop, procedure: str, p0, delta) -> Verdict:
    n = len(rs.runs)
    if n == 0:
        return Verdict(ERROR, "empty run set")
    k = success_count(rs, prop)
    p_hat = Fraction(k, n)
    p0, delta = Fraction(p0), Fraction(delta)
    if procedure == "LEFT_TAILED":
        ok = p_hat >= p0 - delta
    elif procedure == "RIGHT_TAILED":
        ok = p_hat <= p0 + delta
    else:
        ok = abs(p_hat - p0) <= delta
    return Verdict(SUCCESS if ok else FAIL,
                   f"estimated probability {float(p_hat):.6f} ({k}/{n}), "
                   f"{procedure} p0={p0} delta={delta}")


def simulation_statistics(rs: RunSet) -> dict:
    """Enabled/executed counts over every event fired inside the run windows.

    The event at which the start condition became true opens the window and
    is not itself counted.
    """
    m = rs.machine
    out = {}
    if m is not None:
        for op in m.operations:
            out[("enabled", op.name)] = 0
            out[("executed", op.name)] = 0
    for run in rs.runs:
        evs = run.events
        for prev, ev in zip(evs, evs[1:]):
            for name in {lab.op for lab, _ in successors(m, prev.state)}:
                out[("enabled", name)] += 1
            if ("executed", ev.label.op) in out:
                out[("executed", ev.label.op)] += 1
    return out
