"""Explicit-state model checking: invariants, deadlocks, goals, finiteness."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LimitExceeded, ModelError
from ..model.machine import compile_pred
from ..space import ValidationSession
from .verdict import ERROR, FAIL, SUCCESS, Verdict

KINDS = ("FIN", "DLF", "INV", "GOAL")


@dataclass(frozen=True)
class McConfig:
    kind: str
    pred: object = None  # required for INV and GOAL


def explore_session(session: ValidationSession) -> str | None:
    """Explore as far as the limit allows; returns an error message on overflow."""
    try:
        session.explore()
    except LimitExceeded as e:
        return str(e)
    return None


def check_explicit(session: ValidationSession, cfg: McConfig) -> Verdict:
    if cfg.kind not in KINDS:
        return Verdict(ERROR, f"unknown model checking mode {cfg.kind}")
    m = session.machine
    test = None
    if cfg.kind in ("INV", "GOAL"):
        try:
            fn = compile_pred(m, cfg.pred, {})
        except ModelError as e:
            return Verdict(ERROR, str(e))
        test = lambda s: bool(fn(s.values, ()))  # noqa: E731
    overflow = explore_session(session)
    space = session.space

    if cfg.kind == "FIN":
        if overflow:
            return Verdict(ERROR, overflow)
        return Verdict(SUCCESS, f"{len(space.nodes)} states, {len(space.edges)} transitions")

    if cfg.kind == "INV":
        cex = space.shortest_path(lambda s: not test(s))
        if cex is not None:
            return Verdict(FAIL, "invariant violated", trace=cex)
    elif cfg.kind == "DLF":
        cex = space.shortest_path(lambda s: not space.successors_of(s))
        if cex is not None:
            return Verdict(FAIL, "deadlock found", trace=cex)
    else:
        wit = space.shortest_path(test)
        if wit is not None:
            session.record(wit)
            return Verdict(SUCCESS, "goal found", trace=wit)
        if not overflow:
            return Verdict(FAIL, "goal not reachable")

    if overflow:
        return Verdict(ERROR, overflow)
    return Verdict(SUCCESS, f"checked {len(space.nodes)} states")
