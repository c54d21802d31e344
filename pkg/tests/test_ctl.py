from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from oracles import ctl_formulas, ctl_sat, machines, reachable_graph, total
from vove.check.ctl import _Graph, check_ctl, label, parse_ctl, show_ctl
from vove.check.verdict import FAIL, SUCCESS
from vove.space import ValidationSession

PROPS = settings(max_examples=600, deadline=None, suppress_health_check=list(HealthCheck))


def _graph(m):
    s = ValidationSession(m)
    s.explore()
    return _Graph(s.space)


@PROPS
@given(machines(), ctl_formulas())
def test_labelling_matches_path_oracle(m, f):
    _, succ = reachable_graph(m)
    assert label(_graph(m), f, m) == ctl_sat(m, f, total(succ))


@PROPS
@given(machines(), ctl_formulas(max_leaves=3), ctl_formulas(max_leaves=3))
def test_dualities(m, a, b):
    g = _graph(m)
    sat = lambda f: label(g, f, m)  # noqa: E731
    n = lambda f: ("not", f)  # noqa: E731
    assert sat(("AX", a)) == sat(n(("EX", n(a))))
    assert sat(("AG", a)) == sat(n(("EF", n(a))))
    assert sat(("AF", a)) == sat(n(("EG", n(a))))
    assert sat(("EF", a)) == sat(("EU", ("true",), a))
    assert sat(("AF", a)) == sat(("AU", ("true",), a))
    assert sat(("AU", a, b)) == sat(n(("or", ("EU", n(b), ("and", n(a), n(b))), ("EG", n(b)))))
    # fixpoint unfoldings
    assert sat(("EU", a, b)) == sat(("or", b, ("and", a, ("EX", ("EU", a, b)))))
    assert sat(("EG", a)) == sat(("and", a, ("EX", ("EG", a))))


@settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))
@given(ctl_formulas())
def test_show_parse_round_trip(f):
    assert parse_ctl(show_ctl(f)) == f


@pytest.mark.parametrize("text,expected", [
    ("EF{tl_cars /= red}", SUCCESS),
    ("EF{tl_peds /= red}", SUCCESS),
    ("AG EF {tl_cars = red & tl_peds = red}", SUCCESS),
    ("AG (EX true)", SUCCESS),
    ("EF {tl_cars = green & tl_peds = green}", FAIL),
    ("A[{tl_peds = red} U {tl_cars /= red}]", FAIL),
])
def test_traffic_light(traffic, text, expected):
    v = check_ctl(ValidationSession(traffic), parse_ctl(text), expected)
    assert v.status == SUCCESS, v.message


def test_parser_accepts_stacked_unary_operators():
    assert parse_ctl("AGEF {x = 1}") == parse_ctl("AG (EF {x = 1})")
