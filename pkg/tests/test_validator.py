import random

import pytest

from lazytp.benchgen import gen_generator, gen_micro
from lazytp.errors import MalformedPlan
from lazytp.pddl import load
from lazytp.planio import TimedStep, format_plan, parse_plan
from lazytp.search import SearchConfig, plan
from lazytp.validator import validate
from oracles import sample_invariant_violations

GENERATOR_PLAN = """\
0.001: (generate gen) [22]
0.002: (refuel gen tank1) [11]
"""

SHORT_ROAD_DOMAIN = None  # the carpool domain is reused below


@pytest.fixture(scope="module")
def generator1():
    return load(*gen_generator(1))


def test_generator_plan_is_valid(generator1):
    verdict = validate(generator1, GENERATOR_PLAN)
    assert verdict.valid, verdict.report()
    # fuel: 22 - 22 (drain) + 11 * 11/12 (refuel)
    assert verdict.final_values[generator1.fluent("(fuellevel gen)")] == pytest.approx(121 / 12)


def test_short_refuel_breaks_duration(generator1):
    verdict = validate(generator1, GENERATOR_PLAN.replace("[11]", "[7]"))
    assert "duration" in verdict.kinds()


def test_refuel_outside_generate_breaks_invariant(generator1):
    text = "0.001: (generate gen) [22]\n12.000: (refuel gen tank1) [11]\n"
    assert "invariant" in validate(generator1, text).kinds()


def test_fuel_dipping_below_reserve_mid_drive():
    from lazytp.benchgen.carpool import DOMAIN
    problem = """(define (problem p) (:domain carpool)
      (:objects car1 - car t1 - trip l0 l1 - location)
      (:init (parked-at car1 l0) (= (fuel car1) 1.5) (= (total-traveled car1) 0)
             (= (capacity car1) 4) (= (load car1) 0)
             (= (distance l0 l1) 100) (= (avg-speed l0 l1) 50))
      (:goal (driving-at car1 l1)))"""
    g = load(DOMAIN, problem)
    # the drive lasts 2 and burns 0.5 per unit: fuel passes 1 halfway through
    text = "0.001: (depart car1 l0) [1]\n1.002: (drive car1 l0 l1) [2]\n"
    verdict = validate(g, text)
    assert verdict.kinds() == {"invariant"}
    assert all(f.time == pytest.approx(3.002) for f in verdict.failures)


def test_separation_and_running_at_end(generator1):
    text = "0.001: (generate gen) [22]\n0.0015: (refuel gen tank1) [11]\n"
    assert "separation" in validate(generator1, text).kinds()
    text = "0.001: (generate gen) [22]\n"
    assert "goal" in validate(generator1, text).kinds()


def test_unknown_action_is_malformed(generator1):
    with pytest.raises(MalformedPlan):
        validate(generator1, "0.001: (fly gen) [2]\n")
    with pytest.raises(MalformedPlan):
        validate(generator1, "0.001: (generate gen)\n")
    with pytest.raises(MalformedPlan):
        parse_plan("zero: (generate gen) [1]\n")


def test_plan_text_round_trip():
    steps = [TimedStep(0.001, "(a x)", 2.5), TimedStep(3.0, "(b)", None)]
    assert parse_plan(format_plan(steps)) == steps


def _separated(steps, gap=1e-4):
    times = []
    for s in steps:
        times.append(s.time)
        if s.duration is not None:
            times.append(s.time + s.duration)
    times.sort()
    return all(b - a > gap for a, b in zip(times, times[1:]))


def test_endpoint_checks_agree_with_dense_sampling():
    rng = random.Random(17)
    compared = flagged = 0
    for seed in range(40):
        g = load(*gen_micro(seed))
        if not any(a.inv_cond.numeric for a in g.durative_actions):
            continue
        result = plan(g, SearchConfig(timeout=20))
        if result.status != "solved":
            continue
        for _ in range(6):
            steps = [TimedStep(max(0.001, s.time + rng.uniform(-3, 3)), s.label, s.duration)
                     for s in result.plan]
            if not _separated(steps):
                continue
            verdict = validate(g, steps)
            numeric = any(f.kind == "invariant" and "numeric" in f.detail
                          for f in verdict.failures)
            sampled = bool(sample_invariant_violations(g, steps))
            assert numeric == sampled, format_plan(steps)
            compared += 1
            flagged += sampled
    assert compared >= 30 and flagged >= 3
