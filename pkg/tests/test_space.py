from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from oracles import machines, reachable_graph
from vove.errors import LimitExceeded, SemanticsError
from vove.model.machine import ROOT, parse_machine
from vove.model.parser import parse_expr
from vove.lexer import TokenStream
from vove.space import (StateSpace, ValidationSession, enabling_relation, min_max,
                        operation_coverage, project, read_write_matrix, statistics, to_dot,
                        variable_coverage)


@settings(max_examples=500, deadline=None, suppress_health_check=list(HealthCheck))
@given(machines())
def test_exploration_matches_bfs(m):
    _, succ = reachable_graph(m)
    space = StateSpace(m).explore()
    assert set(space.states) == set(succ)
    edges = {(s, t) for s, ts in succ.items() for t in ts}
    assert {(a, b) for a, _, b in space.edges if a is not ROOT} == edges
    assert space.complete
    assert len(space.deadlocks()) == sum(1 for ts in succ.values() if not ts)


@settings(max_examples=100, deadline=None, suppress_health_check=list(HealthCheck))
@given(machines())
def test_exploration_is_deterministic(m):
    a, b = StateSpace(m).explore(), StateSpace(m).explore()
    assert list(a.nodes) == list(b.nodes)
    assert list(a.edges) == list(b.edges)
    assert to_dot(a) == to_dot(b)


def test_traffic_light_statistics(traffic):
    st = statistics(StateSpace(traffic).explore())
    assert st["Number of States"] == 6
    assert st["Number of Transitions"] == 7
    assert st["Deadlocked States"] == 0
    assert st["INITIALISATION"] == 1


def test_enabling_relation(traffic):
    ed = set(enabling_relation(StateSpace(traffic).explore()))
    assert ed == {("cars_ry", "cars_g"), ("cars_g", "cars_y"), ("cars_y", "cars_r"),
                  ("cars_r", "cars_ry"), ("cars_r", "peds_g"), ("peds_g", "peds_r"),
                  ("peds_r", "peds_g"), ("peds_r", "cars_ry")}


def test_read_write_matrix(traffic):
    rw = read_write_matrix(traffic)
    writers = lambda v: {op for kind, (op, var) in rw if kind == "WRITE" and var == v}  # noqa
    assert writers("tl_cars") == {"cars_ry", "cars_g", "cars_y", "cars_r"}
    assert writers("tl_peds") == {"peds_g", "peds_r"}
    assert ("READ", ("peds_g", "tl_cars")) in rw


def test_projection_of_refinement(traffic_ref):
    space = StateSpace(traffic_ref).explore()
    g = project(space, parse_expr(TokenStream.of("queuedCmd")), "queuedCmd")
    assert set(g.nodes) == {"cmd_none", "cmd_cars_ry", "cmd_cars_y", "cmd_cars_g", "cmd_cars_r",
                            "cmd_peds_r", "cmd_peds_g"}
    rel = g.relation()
    assert len(rel) == 19
    assert ("INITIALISATION", "cmd_none") in rel
    assert sum(1 for e in rel if len(e) == 3 and e[1].op == "Reject_cmd") == 6


def test_projection_needs_complete_space(traffic):
    with pytest.raises(SemanticsError):
        project(StateSpace(traffic), parse_expr(TokenStream.of("tl_cars")))


def test_limit_keeps_partial_space():
    m = parse_machine("MACHINE L\nVARIABLES n\nINVARIANT n : 0..50\nINITIALISATION n := 0\n"
                      "OPERATIONS\n  inc = SELECT n < 50 THEN n := n + 1 END\nEND\n")
    space = StateSpace(m)
    with pytest.raises(LimitExceeded):
        space.explore(limit=5)
    assert len(space.nodes) <= 5
    assert not space.complete


def test_session_coverage_tables(traffic):
    s = ValidationSession(traffic)
    assert variable_coverage(s) == {"tl_cars": 0, "tl_peds": 0}
    s.explore()
    assert variable_coverage(s) == {"tl_cars": 4, "tl_peds": 2}
    assert set(operation_coverage(s).values()) == {"COVERED"}


def test_min_max_on_integers():
    m = parse_machine("MACHINE L\nVARIABLES n\nINVARIANT n : 0..9\nINITIALISATION n := 2\n"
                      "OPERATIONS\n  inc = SELECT n < 4 THEN n := n + 1 END\nEND\n")
    s = ValidationSession(m)
    s.explore()
    assert min_max(s) == {"n": (2, 4)}


def test_clone_is_independent(traffic):
    s = ValidationSession(traffic)
    c = s.clone()
    c.explore()
    assert len(s.space.nodes) == 1
    assert len(c.space.nodes) == 6


def test_dot_export(traffic):
    dot = to_dot(StateSpace(traffic).explore(), "TrafficLight")
    assert dot.startswith('digraph "TrafficLight" {')
    assert dot.count("->") == 7
