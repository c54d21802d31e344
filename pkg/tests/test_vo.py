from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import TRAFFIC
from vove.check.verdict import ERROR, FAIL, SUCCESS
from vove.errors import (ArityMismatch, DuplicateName, SyntaxError_, UnknownTechnique,
                         UnresolvedContext)
from vove.vo.checker import LENIENT, STRICT, semantic_check
from vove.vo.document import parse_vo_file
from vove.vo.evaluate import SKIPPED, Env, Evaluator, combine, negate
from vove.vo.expr import BinVo, Leaf, NotVo, parse_vo, parse_vo_expr, show_vo_expr
from vove.vo.requirements import parse_requirements, requirement_kind
from vove.vo.tasks import parse_vt, print_vt

ARTIFACTS = {"TrafficLight": "machine", "TrafficLightCommand_Ref": "machine", "Lift": "machine",
             "TrafficLight_Sim": "sim"}


def _corpus_vts():
    doc = parse_vo_file((TRAFFIC / "traffic.vo").read_text(encoding="utf-8"), ARTIFACTS)
    return list(doc.vts.values())


# --------------------------------------------------------------- tasks

@pytest.mark.parametrize("vt", _corpus_vts(), ids=lambda vt: vt.id)
def test_task_print_round_trip(vt):
    again = parse_vt(print_vt(vt), ARTIFACTS)
    assert again == vt
    assert print_vt(again) == print_vt(vt)


@pytest.mark.parametrize("line,exc", [
    ("X1/TrafficLight/FOO: 1", UnknownTechnique),
    ("X1/TrafficLight/HT: (<PRED, 1=1>, <TIME, 1>, <EVENTUALLY, 1=1>, LEFT_TAILED, 0.5), 0.1",
     ArityMismatch),
    ("X1/TrafficLight, TrafficLight_Sim/MC: <FIN>", ArityMismatch),
    ("X1/Nowhere/MC: <FIN>", UnresolvedContext),
    ("X1/TrafficLight_Sim/MC: <FIN>", UnresolvedContext),
    ("X1/TrafficLight/MC: <INV>", ArityMismatch),
    ("X1/TrafficLight/LTL: G {tl_cars = red}", ArityMismatch),
    ("X1/TrafficLight/LTL: G {tl_cars = red}, SUCCESS, FAIL", ArityMismatch),
    ("X1/TrafficLight/MC: <FIN", SyntaxError_),
    ("X1/TrafficLight/TR: [cars_ry <tl_cars = >]", SyntaxError_),
])
def test_task_errors(line, exc):
    with pytest.raises(exc):
        parse_vt(line, ARTIFACTS)


def test_unsupported_techniques_parse():
    vt = parse_vt("PO1/TrafficLight/PO: prove everything", ARTIFACTS)
    assert not vt.supported


def test_unicode_and_ascii_agree():
    a = parse_vt("L/TrafficLight/LTL: G ({tl_cars ≠ red} ⇒ {tl_peds = red}), SUCCESS")
    b = parse_vt("L/TrafficLight/LTL: G ({tl_cars /= red} => {tl_peds = red}), SUCCESS")
    assert a == b


# ---------------------------------------------------------- expressions

def test_precedence():
    e = parse_vo_expr("a ; b ∧ c ∨ ¬d ⇒ e ⇔ f")
    a, b, c, d, e_, f = (Leaf(x) for x in "abcdef")
    want = BinVo("iff", BinVo("implies", BinVo("or", BinVo("and", BinVo("seq", a, b), c),
                                                NotVo(d)), e_), f)
    assert e == want
    assert parse_vo_expr("a & b | c => d <=> !e") == parse_vo_expr("a ∧ b ∨ c ⇒ d ⇔ ¬e")


def test_left_associative_sequence():
    assert parse_vo_expr("a;b;c") == BinVo("seq", BinVo("seq", Leaf("a"), Leaf("b")), Leaf("c"))


vo_exprs = st.recursive(
    st.sampled_from(["T1", "T2", "LTL5.1", "VO-X"]).map(Leaf),
    lambda ch: st.one_of(ch.map(NotVo),
                         st.tuples(st.sampled_from(["iff", "implies", "or", "and", "seq"]), ch, ch)
                         .map(lambda t: BinVo(*t))),
    max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(vo_exprs, st.booleans())
def test_expression_round_trip(e, ascii):
    assert parse_vo_expr(show_vo_expr(e, ascii=ascii)) == e


def test_vo_line():
    vo = parse_vo("VO7 [validates FUN7, SAF1]: LTL7.1 ∧ LTL7.2")
    assert vo.validates == ("FUN7", "SAF1")
    assert vo.expr == BinVo("and", Leaf("LTL7.1"), Leaf("LTL7.2"))
    with pytest.raises(SyntaxError_):
        parse_vo("VO8: LTL1 ∧")
    with pytest.raises(SyntaxError_):
        parse_vo("VO8: (LTL1")


# ------------------------------------------------------ three-valued logic

STATUSES = (SUCCESS, FAIL, ERROR)


@given(st.sampled_from(STATUSES), st.sampled_from(STATUSES))
def test_connective_laws(a, b):
    assert negate(negate(a)) == a
    assert combine("and", a, b) == combine("and", b, a)
    assert negate(combine("and", a, b)) == combine("or", negate(a), negate(b))
    assert combine("implies", a, b) == combine("or", negate(a), b)
    assert combine("iff", a, b) == combine("and", combine("implies", a, b),
                                           combine("implies", b, a))
    if ERROR in (a, b):
        assert combine("or", a, b) == ERROR


# Tasks whose verdict does not depend on the session state
FIXED = {
    "S1": "S1/TrafficLight/MC: <INV, tl_peds : {red, green}>",
    "S2": "S2/TrafficLight/CTL: EF {tl_cars = green}, SUCCESS",
    "F1": "F1/TrafficLight/MC: <INV, tl_cars = red>",
    "F2": "F2/TrafficLight/LTL: G {tl_peds = red}, SUCCESS",
    "E1": "E1/TrafficLight/LTL: H (F {tl_cars = red}), SUCCESS",
}


def _oracle(e):
    if isinstance(e, Leaf):
        return {"S": SUCCESS, "F": FAIL, "E": ERROR}[e.id[0]]
    if isinstance(e, NotVo):
        return {SUCCESS: FAIL, FAIL: SUCCESS, ERROR: ERROR}[_oracle(e.operand)]
    a = _oracle(e.left)
    if e.op == "seq":
        return _oracle(e.right) if a == SUCCESS else a
    b = _oracle(e.right)
    if ERROR in (a, b):
        return ERROR
    x, y = a == SUCCESS, b == SUCCESS
    v = {"and": x and y, "or": x or y, "implies": (not x) or y, "iff": x == y}[e.op]
    return SUCCESS if v else FAIL


fixed_exprs = st.recursive(
    st.sampled_from(sorted(FIXED)).map(Leaf),
    lambda ch: st.one_of(ch.map(NotVo),
                         st.tuples(st.sampled_from(["iff", "implies", "or", "and", "seq"]), ch, ch)
                         .map(lambda t: BinVo(*t))),
    max_leaves=6)


@settings(max_examples=150, deadline=None, suppress_health_check=list(HealthCheck))
@given(fixed_exprs)
def test_evaluation_matches_three_valued_oracle(traffic, e):
    vts = {k: parse_vt(v) for k, v in FIXED.items()}
    ev = Evaluator(Env({"TrafficLight": traffic}), vts)
    vo = parse_vo("VO: " + show_vo_expr(e))
    assert ev.evaluate(vo).status == _oracle(e)


# -------------------------------------------------------- threading and blame

def _doc(text):
    return parse_vo_file(text, ARTIFACTS)


TRACES = """
TR1/TrafficLight/TR: [INITIALISATION, cars_ry, cars_g <tl_cars = green>]
TR2/TrafficLight/TR: [INITIALISATION, peds_g <tl_peds = green>]
TRX/TrafficLight/TR: [INITIALISATION, cars_g]
VCT1/TrafficLight/VCT: R_vct(tl_cars) = 3 ∧ R_vct(tl_peds) = 2
VCT2/TrafficLight/VCT: R_vct(tl_cars) = 4 ∧ R_vct(tl_peds) = 2
OCT1/TrafficLight/OCT: R_oct(peds_r) = UNCOVERED ∧ R_oct(cars_g) = COVERED
"""


def _eval(traffic, text, vo_line, mode=STRICT, seed=0):
    doc = _doc(text + vo_line + "\n")
    env = Env({"TrafficLight": traffic}, mode=mode, seed=seed)
    return Evaluator(env, doc.vts, None, doc.vos).evaluate(doc.vos[-1])


def test_sequence_threads_coverage(traffic):
    assert _eval(traffic, TRACES, "VO: (TR1 ∧ TR2); VCT1").status == SUCCESS
    assert _eval(traffic, TRACES, "VO: (TR1 ∧ TR2); OCT1").status == SUCCESS
    assert _eval(traffic, TRACES, "VO: TR1; VCT1").status == FAIL


def test_strict_mode_requires_predecessor(traffic):
    r = _eval(traffic, TRACES, "VO: VCT2")
    assert r.status == ERROR
    assert any(d.code == "coverage-without-tasks" for d in r.diagnostics)
    # lenient mode explores the state space first
    assert _eval(traffic, TRACES, "VO: VCT2", mode=LENIENT).status == SUCCESS


def test_failed_left_operand_skips_right(traffic):
    r = _eval(traffic, TRACES, "VO: TRX; VCT1")
    assert r.status == FAIL
    assert r.outcome.children[1].status == SKIPPED
    assert r.blame == ["TRX", "TrafficLight"]


def test_blame_includes_requirements(traffic):
    text = TRACES + "VO-T [validates SCENARIO9]: TRX\n"
    doc = _doc(text + "VO [validates COV9]: TR1 ∧ TRX\n")
    ev = Evaluator(Env({"TrafficLight": traffic}), doc.vts, None, doc.vos)
    r = ev.evaluate(doc.vos[-1])
    assert r.status == FAIL
    assert r.blame == ["TRX", "COV9", "SCENARIO9", "TrafficLight"]


def test_negation_blames_operand(traffic):
    r = _eval(traffic, TRACES, "VO: ¬TR1")
    assert r.status == FAIL
    assert "TR1" in r.blame


def test_memoised_tasks_are_marked_reused(traffic):
    doc = _doc(TRACES + "VO1: TR1\nVO2: TR1 ∧ TR2\n")
    ev = Evaluator(Env({"TrafficLight": traffic}), doc.vts, None, doc.vos)
    ev.evaluate(doc.vos[0])
    r = ev.evaluate(doc.vos[1])
    assert r.outcome.children[0].reused
    assert not r.outcome.children[1].reused


# ------------------------------------------------------------ static checks

def test_semantic_check_diagnostics():
    text = TRACES + ("PO1/TrafficLight/PO: everything\n"
                     "VO1 [validates NOPE]: TR1 ∧ MISSING\nVO2: PO1\nVO3: VCT1\n")
    doc = _doc(text)
    reqs = parse_requirements("FUN1: something\n")
    codes = {d.code for d in semantic_check(doc.vos, doc.vts, STRICT, reqs)}
    assert codes >= {"unknown-requirement", "undefined-task", "unsupported-technique",
                     "coverage-without-tasks", "unused-task"}
    lenient = semantic_check(doc.vos, doc.vts, LENIENT, reqs)
    assert all(d.kind == "warning" for d in lenient if d.code == "coverage-without-tasks")


def test_duplicate_declarations():
    with pytest.raises(DuplicateName):
        _doc(TRACES + "VO1: TR1\nVO1: TR2\n")
    with pytest.raises(DuplicateName):
        _doc(TRACES + TRACES)


def test_requirements_file():
    reqs = parse_requirements("# comment\nFUN1: first\n  continued\nPROB-TIM2: timing\n")
    assert [(r.id, r.kind, r.prose) for r in reqs] == [
        ("FUN1", "FUN", "first continued"), ("PROB-TIM2", "PROB-TIM", "timing")]
    assert requirement_kind("COV-LIFT") == "COV"
    with pytest.raises(DuplicateName):
        parse_requirements("A1: x\nA1: y\n")


def test_corpus_requirements_cover_all_obligations():
    reqs = {r.id for r in parse_requirements((TRAFFIC / "traffic.req").read_text())}
    doc = _doc((TRAFFIC / "traffic.vo").read_text())
    for vo in doc.vos:
        assert vo.validates and set(vo.validates) <= reqs


AUTO = """MACHINE Auto
VARIABLES engine, arm, lamp
INVARIANT engine : 0..1 & arm : 0..2 & lamp : 0..1
INITIALISATION engine := 0 || arm := 0 || lamp := 0
OPERATIONS
  start = SELECT engine = 0 THEN engine := 1 END;
  move = SELECT arm < 2 THEN arm := arm + 1 END;
  blink = SELECT engine = 1 & arm = 2 & lamp = 0 THEN lamp := 1 END
END
"""

AUTO_VTS = """
MC-AUTO/Auto/MC: <GOAL, engine = 1 ∧ arm = 2>
TR-AUTO/Auto/TR: [blink <lamp = 1>]
"""


def test_goal_state_then_replay():
    from vove.model.machine import parse_machine
    m = parse_machine(AUTO)

    def run(line):
        doc = parse_vo_file(AUTO_VTS + line + "\n", {"Auto": "machine"})
        return Evaluator(Env({"Auto": m}), doc.vts, None, doc.vos).evaluate(doc.vos[-1])

    assert run("VO-AUTO: MC-AUTO; TR-AUTO").status == SUCCESS
    # without the goal search the replay starts from the initial state
    assert run("VO-AUTO: TR-AUTO").status == FAIL
