from __future__ import annotations

import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from vove.errors import BadProbabilitySum, SimConfigError, UnknownActivation
from vove.model.machine import INIT, load_machine, successors
from vove.model.parser import parse_pred_text
from vove.sim.config import parse_sim_config
from vove.sim.engine import (Condition, aggregate_statistics, get_engine, monte_carlo, run_seed,
                             simulate, windowed_run)
from vove.sim.stats import (Hypothesis, binomial_reject, estimate_probability, hypothesis_test,
                            simulation_statistics, success_count)
from conftest import CORPUS

RED_RED = Condition("PRED", parse_pred_text("tl_cars = red & tl_peds = red"))
CARS_GREEN = ("EVENTUALLY", parse_pred_text("tl_cars = green"))
PEDS_GREEN = ("EVENTUALLY", parse_pred_text("tl_peds = green"))


def eventually_green_probability(horizon: int, first: int, other: int, p: Fraction) -> Fraction:
    """Exact probability that the wanted branch turns green within ``horizon``.

    Choices happen at the start of every cycle; the wanted branch turns green
    ``first`` ms after its choice, the other branch takes ``other`` ms before
    the next choice.
    """
    total, t, k = Fraction(0), 0, 0
    while t + first <= horizon:
        total += (1 - p) ** k * p
        t += other
        k += 1
    return total


def traffic_config(d_ry=5000, d_g=500, d_y=5000, d_r=500, d_pg=5000, d_pr=5000, p="0.5"):
    q = str(1 - Fraction(p))
    return parse_sim_config(json.dumps({"activations": [
        {"id": "$initialise_machine", "execute": "$initialise_machine", "activating": "choose"},
        {"id": "choose", "chooseActivation": {"cars_ry": p, "peds_g": q}},
        {"id": "cars_ry", "execute": "cars_ry", "after": d_ry, "activating": "cars_g"},
        {"id": "cars_g", "execute": "cars_g", "after": d_g, "activating": "cars_y"},
        {"id": "cars_y", "execute": "cars_y", "after": d_y, "activating": "cars_r"},
        {"id": "cars_r", "execute": "cars_r", "after": d_r, "activating": "choose"},
        {"id": "peds_g", "execute": "peds_g", "after": d_pg, "activating": "peds_r"},
        {"id": "peds_r", "execute": "peds_r", "after": d_pr, "activating": "choose"},
    ]}))


def test_analytic_success_probability():
    # cars turn green 5500 ms after a choice, a pedestrian cycle takes 10000 ms
    assert eventually_green_probability(30000, 5500, 10000, Fraction(1, 2)) == Fraction(7, 8)
    # pedestrians turn green 5000 ms after a choice, a car cycle takes 11000 ms
    assert eventually_green_probability(30000, 5000, 11000, Fraction(1, 2)) == Fraction(7, 8)


def test_listing_timings(traffic, traffic_sim):
    # find a run whose first choice is the car branch
    for seed in range(50):
        run = simulate(traffic, traffic_sim, seed, Condition("STEPS", 4))
        if run.events[1].label.op == "cars_ry":
            break
    assert [(e.time, e.label.op) for e in run.events] == [
        (0, "INITIALISATION"), (5000, "cars_ry"), (5500, "cars_g"), (10500, "cars_y"),
        (11000, "cars_r")]


def test_steps_zero_keeps_only_initialisation(traffic, traffic_sim):
    run = simulate(traffic, traffic_sim, 1, Condition("STEPS", 0))
    assert [e.label for e in run.events] == [INIT]


def test_fraction_close_to_analytic_value(traffic, traffic_sim):
    n = 1000
    rs = monte_carlo(traffic, traffic_sim, n, RED_RED, Condition("TIME", 30000), 7)
    frac = success_count(rs, CARS_GREEN) / n
    sigma = math.sqrt(0.875 * 0.125 / n)
    assert abs(frac - 0.875) <= 3 * sigma


def test_same_seed_same_digest(traffic, traffic_sim):
    a = monte_carlo(traffic, traffic_sim, 50, RED_RED, Condition("TIME", 30000), 3)
    b = monte_carlo(traffic, traffic_sim, 50, RED_RED, Condition("TIME", 30000), 3)
    c = monte_carlo(traffic, traffic_sim, 50, RED_RED, Condition("TIME", 30000), 4)
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert a.seeds == [run_seed(3, i) for i in range(50)]


def test_empty_run_set(traffic, traffic_sim):
    rs = monte_carlo(traffic, traffic_sim, 0, RED_RED, Condition("TIME", 30000), 3)
    assert rs.to_csv() == "run,time,op\n"
    h = Hypothesis(RED_RED, Condition("TIME", 30000), CARS_GREEN, "LEFT_TAILED", Fraction(4, 5))
    assert hypothesis_test(rs, h, Fraction(1, 100)).status == "ERROR"


delays = st.integers(0, 3000)


@settings(max_examples=80, deadline=None, suppress_health_check=list(HealthCheck))
@given(delays, delays, delays, delays, st.integers(1, 3000), st.integers(1, 3000),
       st.sampled_from(["0", "0.25", "0.5", "0.8", "1"]), st.integers(0, 2**32),
       st.sampled_from(["TIME", "STEPS"]))
def test_run_invariants(dry, dg, dy, dr, dpg, dpr, p, seed, end_kind):
    m = load_machine(CORPUS / "trafficlight" / "TrafficLight.mch")
    cfg = traffic_config(dry, dg, dy, dr, dpg, dpr, p)
    end = Condition(end_kind, 20000 if end_kind == "TIME" else 25)
    eng = get_engine(m, cfg)
    run = windowed_run(eng, random.Random(seed), Condition("STEPS", 0), end)
    times = [e.time for e in run.events]
    assert times == sorted(times)
    assert run.events[0].label == INIT
    for prev, ev in zip(run.events, run.events[1:]):
        assert (ev.label, ev.state) in successors(m, prev.state)
    if end_kind == "TIME":
        assert times[-1] <= 20000
    else:
        assert len(run.events) <= 26
    if p == "1":
        assert all(e.label.op not in ("peds_g", "peds_r") for e in run.events)


@settings(max_examples=40, deadline=None, suppress_health_check=list(HealthCheck))
@given(st.integers(0, 2**32), st.integers(0, 40), st.integers(0, 30),
       st.sampled_from(["1 = 1", "tl_peds = green", "tl_cars = yellow"]))
def test_aggregate_statistics_matches_full_runs(seed, steps, n, start_pred):
    m = load_machine(CORPUS / "trafficlight" / "TrafficLight.mch")
    cfg = traffic_config()
    start = Condition("PRED", parse_pred_text(start_pred))
    end = Condition("STEPS", steps)
    full = simulation_statistics(monte_carlo(m, cfg, n, start, end, seed))
    assert aggregate_statistics(m, cfg, n, start, end, seed) == full


def test_blocked_activation_is_skipped(traffic):
    cfg = parse_sim_config(json.dumps({"activations": [
        {"id": "$initialise_machine", "execute": "$initialise_machine",
         "activating": ["y", "ry"]},
        {"id": "y", "execute": "cars_y", "after": 10},
        {"id": "ry", "execute": "cars_ry", "after": 20},
    ]}))
    run = simulate(traffic, cfg, 0, Condition("TIME", 100))
    assert [e.label.op for e in run.events] == ["INITIALISATION", "cars_ry"]
    assert run.blocked == 1
    assert run.stalled


def test_deterministic_periodic_config_terminates():
    m = load_machine(CORPUS / "lift" / "Lift.mch")
    cfg = parse_sim_config(json.dumps({"activations": [
        {"id": "$initialise_machine", "execute": "$initialise_machine", "activating": "up"},
        {"id": "up", "execute": "up", "after": 10, "activating": "down"},
        {"id": "down", "execute": "down", "after": 10, "activating": "up"},
    ]}))
    run = simulate(m, cfg, 0, Condition("TIME", 100000))
    assert len(run.events) == 10001
    assert run.events[-1].state["level"] == 0


def test_zero_time_livelock_is_reported():
    m = load_machine(CORPUS / "lift" / "Lift.mch")
    cfg = parse_sim_config(json.dumps({"activations": [
        {"id": "$initialise_machine", "execute": "$initialise_machine", "activating": "up"},
        {"id": "up", "execute": "up", "after": 0, "activating": "down"},
        {"id": "down", "execute": "down", "after": 0, "activating": "up"},
    ]}))
    with pytest.raises(SimConfigError):
        simulate(m, cfg, 0, Condition("TIME", 1))


@pytest.mark.parametrize("acts,exc", [
    ([{"id": "choose", "chooseActivation": {"a": "0.5"}}], BadProbabilitySum),
    ([{"id": "$initialise_machine", "execute": "$initialise_machine", "activating": "nope"}],
     UnknownActivation),
    ([{"id": "x", "execute": "cars_ry"}], UnknownActivation),
    ([{"id": "$initialise_machine", "execute": "$initialise_machine", "after": -1}],
     SimConfigError),
])
def test_bad_configs(acts, exc):
    if acts[0]["id"] == "choose":
        acts = [{"id": "$initialise_machine", "execute": "$initialise_machine"},
                {"id": "a", "execute": "cars_ry"}] + acts
    with pytest.raises(exc):
        parse_sim_config(json.dumps({"activations": acts}))


def test_unknown_operation_is_rejected(traffic):
    cfg = parse_sim_config(json.dumps({"activations": [
        {"id": "$initialise_machine", "execute": "$initialise_machine", "activating": "x"},
        {"id": "x", "execute": "fly"}]}))
    with pytest.raises(SimConfigError):
        get_engine(traffic, cfg)


# ------------------------------------------------------------ statistics

def _cdf(k, n, p):
    return sum(Fraction(math.comb(n, i)) * p**i * (1 - p)**(n - i) for i in range(k + 1))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 60), st.data(), st.sampled_from([Fraction(1, 2), Fraction(4, 5),
                                                       Fraction(1, 10)]),
       st.sampled_from([Fraction(1, 100), Fraction(1, 20)]),
       st.sampled_from(["LEFT_TAILED", "RIGHT_TAILED", "TWO_TAILED"]))
def test_binomial_test_matches_exact_sums(n, data, p0, alpha, proc):
    k = data.draw(st.integers(0, n))
    low = _cdf(k, n, p0)
    high = 1 - _cdf(k - 1, n, p0) if k > 0 else Fraction(1)
    want = {"LEFT_TAILED": low < alpha, "RIGHT_TAILED": high < alpha,
            "TWO_TAILED": 2 * min(low, high) < alpha}[proc]
    # skip values within floating point noise of the threshold
    margin = min(abs(low - alpha), abs(high - alpha), abs(2 * min(low, high) - alpha))
    if margin > Fraction(1, 10**9):
        assert binomial_reject(k, n, float(p0), float(alpha), proc) == want


def test_estimate_probability_band(traffic, traffic_sim):
    rs = monte_carlo(traffic, traffic_sim, 200, RED_RED, Condition("TIME", 30000), 11)
    k = success_count(rs, CARS_GREEN)
    p_hat = Fraction(k, 200)
    v = estimate_probability(rs, CARS_GREEN, "TWO_TAILED", p_hat, 0)
    assert v.status == "SUCCESS"
    v = estimate_probability(rs, CARS_GREEN, "LEFT_TAILED", p_hat + Fraction(1, 100), 0)
    assert v.status == "FAIL"
    v = estimate_probability(rs, CARS_GREEN, "RIGHT_TAILED", p_hat - Fraction(1, 100),
                             Fraction(1, 100))
    assert v.status == "SUCCESS"


def test_unstarted_runs_count_as_failures(traffic, traffic_sim):
    never = Condition("PRED", parse_pred_text("tl_cars = green & tl_peds = green"))
    rs = monte_carlo(traffic, traffic_sim, 20, never, Condition("TIME", 100), 1)
    assert not any(r.started for r in rs.runs)
    assert success_count(rs, CARS_GREEN) == 0


def test_always_property(traffic, traffic_sim):
    rs = monte_carlo(traffic, traffic_sim, 100, RED_RED, Condition("TIME", 30000), 5)
    always_safe = ("ALWAYS", parse_pred_text("tl_cars = red or tl_peds = red"))
    assert success_count(rs, always_safe) == 100
    assert success_count(rs, ("ALWAYS", parse_pred_text("tl_peds = red"))) < 100


def test_hypothesis_validation():
    with pytest.raises(ValueError):
        Hypothesis(RED_RED, Condition("TIME", 1), CARS_GREEN, "SIDEWAYS", Fraction(1, 2))
