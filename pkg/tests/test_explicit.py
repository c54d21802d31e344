from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import ATOMS, bfs_distance, machines, pred_fn, reachable_graph
from vove.check.explicit import McConfig, check_explicit
from vove.check.verdict import ERROR, FAIL, SUCCESS
from vove.model.machine import parse_machine
from vove.model.parser import parse_pred_text
from vove.space import ValidationSession

PROPS = settings(max_examples=600, deadline=None, suppress_health_check=list(HealthCheck))


@PROPS
@given(machines(), st.sampled_from(ATOMS), st.sampled_from(("INV", "DLF", "GOAL")))
def test_matches_bfs_oracle(m, atom, kind):
    inits, succ = reachable_graph(m)
    p = pred_fn(m, atom)
    s = ValidationSession(m)
    v = check_explicit(s, McConfig(kind, None if kind == "DLF" else parse_pred_text(atom)))
    if kind == "INV":
        dist = bfs_distance(inits, succ, lambda x: not p(x))
    elif kind == "DLF":
        dist = bfs_distance(inits, succ, lambda x: not succ[x])
    else:
        dist = bfs_distance(inits, succ, p)
    found = dist is not None
    if kind == "GOAL":
        assert v.status == (SUCCESS if found else FAIL)
    else:
        assert v.status == (FAIL if found else SUCCESS)
    if found:
        # shortest witness: INITIALISATION plus ``dist`` operations
        assert len(v.trace.steps) == dist + 1
    assert len(s.space.nodes) == len(succ) + 1


def test_traffic_light_invariants(traffic):
    for text in ("tl_cars = red or tl_peds = red", "tl_peds : {red, green}"):
        v = check_explicit(ValidationSession(traffic), McConfig("INV", parse_pred_text(text)))
        assert v.status == SUCCESS
    assert check_explicit(ValidationSession(traffic), McConfig("DLF")).status == SUCCESS
    assert check_explicit(ValidationSession(traffic), McConfig("FIN")).status == SUCCESS


def test_goal_records_witness_as_current_trace(traffic):
    s = ValidationSession(traffic)
    v = check_explicit(s, McConfig("GOAL", parse_pred_text("tl_cars = yellow")))
    assert v.status == SUCCESS
    assert s.current_trace.last["tl_cars"] == "yellow"
    assert [lab.op for lab, _ in v.trace.steps] == ["INITIALISATION", "cars_ry", "cars_g",
                                                    "cars_y"]


def test_limit_exceeded_is_error():
    m = parse_machine("MACHINE L\nVARIABLES n\nINVARIANT n : 0..100\nINITIALISATION n := 0\n"
                      "OPERATIONS\n  inc = SELECT n < 100 THEN n := n + 1 END\nEND\n")
    s = ValidationSession(m, limit=10)
    assert check_explicit(s, McConfig("FIN")).status == ERROR
    assert check_explicit(ValidationSession(m, limit=10),
                          McConfig("INV", parse_pred_text("n < 5"))).status == FAIL


def test_unknown_kind_is_error(traffic):
    assert check_explicit(ValidationSession(traffic), McConfig("XYZ")).status == ERROR


@pytest.mark.parametrize("text", ["tl_cars = purple", "nosuchvar = 1"])
def test_ill_typed_predicate_is_error(traffic, text):
    from vove.errors import ModelError
    try:
        pred = parse_pred_text(text)
    except ModelError:
        return
    v = check_explicit(ValidationSession(traffic), McConfig("INV", pred))
    assert v.status == ERROR
