from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from conftest import CORPUS, TRAFFIC
from oracles import machine_texts
from vove.errors import (DuplicateName, GuardNotSatisfied, InitViolatesType, SyntaxError_,
                         TypeMismatch, TypeViolation, UnboundParameter, UnknownIdentifier)
from vove.model.machine import (EnumType, IntType, apply_event, enabled_events, guard_holds,
                                initial_states, load_machine, parse_machine, print_machine,
                                successors)

MACHINE_FILES = [TRAFFIC / "TrafficLight.mch", TRAFFIC / "TrafficLight_Ref.mch",
                 CORPUS / "lift" / "Lift.mch"]


def test_traffic_light_typing(traffic):
    assert traffic.var_names == ("tl_cars", "tl_peds")
    assert traffic.var_type("tl_cars") == EnumType("colors", ("red", "redyellow", "yellow",
                                                              "green"))
    # {red, green} is a subset of colors, so tl_peds still has the colors type
    assert isinstance(traffic.var_type("tl_peds"), EnumType)


def test_initial_menu(traffic):
    (s0,) = initial_states(traffic)
    assert s0.as_dict() == {"tl_cars": "red", "tl_peds": "red"}
    assert [str(lab) for lab in enabled_events(traffic, s0)] == ["cars_ry", "peds_g"]


def test_apply_event(traffic):
    s0 = initial_states(traffic)[0]
    s1 = apply_event(traffic, s0, "cars_ry")
    assert s1["tl_cars"] == "redyellow"
    with pytest.raises(GuardNotSatisfied):
        apply_event(traffic, s1, "peds_g")
    with pytest.raises(UnknownIdentifier):
        apply_event(traffic, s1, "fly")
    assert guard_holds(traffic, s0, "peds_g")


def test_parameters_are_enumerated(traffic_ref):
    s0 = initial_states(traffic_ref)[0]
    labels = [lab.show_named() for lab, _ in successors(traffic_ref, s0)]
    assert len(labels) == 6
    assert "Send_cmd(cmd=cmd_cars_r)" in labels
    with pytest.raises(UnboundParameter):
        apply_event(traffic_ref, s0, "Send_cmd")
    s1 = apply_event(traffic_ref, s0, "Send_cmd", {"cmd": "cmd_peds_g"})
    assert s1["queuedCmd"] == "cmd_peds_g"


@pytest.mark.parametrize("path", MACHINE_FILES, ids=lambda p: p.name)
def test_print_round_trip(path):
    m = load_machine(path)
    again = parse_machine(print_machine(m))
    assert print_machine(again) == print_machine(m)
    assert again.operations == m.operations
    assert again.variables == m.variables


@settings(max_examples=150, deadline=None, suppress_health_check=list(HealthCheck))
@given(machine_texts())
def test_random_print_round_trip(text):
    m = parse_machine(text)
    again = parse_machine(print_machine(m))
    assert (again.variables, again.init, again.operations) == (m.variables, m.init,
                                                               m.operations)


def test_lift_is_bounded_integer():
    m = load_machine(CORPUS / "lift" / "Lift.mch")
    assert m.var_type("level") == IntType(0, 100)


BAD = [
    ("MACHINE A\nVARIABLES x\nINVARIANT x : 0..1\nINITIALISATION x := 2\nEND\n", None),
    ("MACHINE A\nVARIABLES x\nINVARIANT x : 0..1\nINITIALISATION x := 0 || y := 0\nEND\n",
     UnknownIdentifier),
    ("MACHINE A\nVARIABLES x, x\nINVARIANT x : 0..1\nINITIALISATION x := 0\nEND\n",
     DuplicateName),
    ("MACHINE A\nSETS C = {a, b}\nVARIABLES x\nINVARIANT x : C\nINITIALISATION x := 1\nEND\n",
     TypeMismatch),
    ("MACHINE A\nVARIABLES x\nINVARIANT x : 0..1\nINITIALISATION x := \nEND\n", SyntaxError_),
    ("MACHINE A\nVARIABLES x\nINITIALISATION x := 0\nEND\n", TypeMismatch),
]


@pytest.mark.parametrize("text,exc", BAD)
def test_rejected_machines(text, exc):
    if exc is None:
        m = parse_machine(text)
        with pytest.raises(InitViolatesType):
            initial_states(m)
    else:
        with pytest.raises(exc):
            parse_machine(text)


def test_out_of_range_successor_is_a_type_violation():
    m = parse_machine("MACHINE A\nVARIABLES x\nINVARIANT x : 0..1\nINITIALISATION x := 1\n"
                      "OPERATIONS\n  inc = SELECT x >= 0 THEN x := x + 1 END\nEND\n")
    with pytest.raises(TypeViolation):
        successors(m, initial_states(m)[0])


def test_diagnostic_positions():
    with pytest.raises(UnknownIdentifier) as exc:
        parse_machine("MACHINE A\nVARIABLES x\nINVARIANT x : 0..1\nINITIALISATION x := 0\n"
                      "OPERATIONS\n  op = SELECT z = 1 THEN x := 1 END\nEND\n")
    d = exc.value.diagnostics[0]
    assert d.line == 6
