import pytest

from lazytp.benchgen import gen_carpool, gen_generator, gen_micro
from lazytp.encoding import LpRunner
from lazytp.lp import make_solver
from lazytp.pddl import load
from lazytp.search import Planner, SearchConfig, SuccessorGenerator, plan
from lazytp.search.pruning import ClosedList, FluentAnalysis
from lazytp.search.state import initial_state
from lazytp.validator import validate
from helpers import run_sequence, snap_named

STRETCH_DOMAIN = """\
(define (domain stretch)
  (:requirements :durative-actions :duration-inequalities :fluents :continuous-effects)
  (:predicates (done))
  (:functions (x))
  (:durative-action work
    :parameters ()
    :duration (and (>= ?duration 8) (<= ?duration 15))
    :condition (at start (>= (x) 0))
    :effect (and (at end (done)) (increase (x) (* #t 1)))))
"""

STRETCH_PROBLEM = """\
(define (problem stretch-1)
  (:domain stretch)
  (:init (= (x) 0))
  (:goal (done))
  %s)
"""


def stretch(metric=""):
    return load(STRETCH_DOMAIN, STRETCH_PROBLEM % metric)


def test_goal_true_initially_gives_empty_plan():
    g = load(STRETCH_DOMAIN, STRETCH_PROBLEM.replace("(:goal (done))", "(:goal (>= (x) 0))") % "")
    result = plan(g)
    assert result.status == "solved"
    assert result.plan == [] and result.lp_runs == 0


def test_flexible_action_takes_shortest_duration_at_epsilon():
    result = plan(stretch())
    assert result.status == "solved"
    (step,) = result.plan
    assert step.time == pytest.approx(0.001)
    assert step.duration == pytest.approx(8.0)


def test_metric_drives_final_schedule():
    result = plan(stretch("(:metric maximize (x))"))
    (step,) = result.plan
    assert step.duration == pytest.approx(15.0)
    assert result.metric_value == pytest.approx(15.0)


def test_generator_one_tank():
    g = load(*gen_generator(1))
    result = plan(g)
    assert result.status == "solved" and result.plan_happenings == 4
    assert validate(g, result.plan_text()).valid


def test_zero_tanks_needs_two_happenings():
    result = plan(load(*gen_generator(0)))
    assert result.status == "solved" and result.plan_happenings == 2


def test_capped_tank_is_unsolvable():
    result = plan(load(*gen_generator(1, capped_volume=9)), SearchConfig(timeout=60))
    assert result.status == "unsolvable"


def test_lazy_goal_check_is_gated():
    result = plan(load(*gen_generator(1)))
    s = result.search
    assert s.lp_goal_checks == s.gated_goal_candidates == 1
    assert s.fact_goal_states == 2


def test_always_lp_goal_check_is_not_gated():
    result = plan(load(*gen_generator(2)), SearchConfig(strategy="always-lp"))
    assert result.search.gated_goal_candidates == 0
    assert result.search.lp_goal_checks >= 1


SMALL_ROAD = """(define (problem road) (:domain carpool)
  (:objects car1 - car t1 - trip l0 l1 - location)
  (:init (parked-at car1 l0) (= (fuel car1) 50) (= (total-traveled car1) 0)
         (= (capacity car1) 4) (= (load car1) 0) (= (passengers t1) 1)
         (trip-from t1 l0) (trip-to t1 l1) (waiting t1)
         (= (distance l0 l1) 100) (= (avg-speed l0 l1) 50))
  (:goal (fulfilled t1)))"""


def test_park_start_runs_no_lp():
    from lazytp.benchgen.carpool import DOMAIN
    g = load(DOMAIN, SMALL_ROAD)
    runner = LpRunner(make_solver("simplex"))
    gen = SuccessorGenerator(g, SearchConfig(strategy="lazy"), runner)
    states, pruned = run_sequence(g, gen, [("depart", "start"), ("depart", "end"),
                                           ("drive", "start")])
    assert pruned is None
    drive_runs = runner.stats.lp_runs
    assert drive_runs >= 1
    state = states[-1]
    state = gen.apply(state, snap_named(g, gen, state, "drive", "end"))
    before = runner.stats.lp_runs
    child = gen.apply(state, snap_named(g, gen, state, "park", "start"))
    assert child and runner.stats.lp_runs == before


def test_lazy_never_runs_more_lps_than_always_lp():
    for seed in range(12):
        g = load(*gen_micro(seed))
        lazy = plan(g, SearchConfig(strategy="lazy", timeout=30))
        full = plan(g, SearchConfig(strategy="always-lp", timeout=30))
        assert lazy.status == full.status
        if lazy.status == "solved":
            assert lazy.lp_runs <= full.lp_runs


def test_carpool_small_instance():
    g = load(*gen_carpool(1, 1, 100, seed=1))
    result = plan(g, SearchConfig(timeout=120))
    assert result.status == "solved"
    assert validate(g, result.plan_text()).valid


def test_fluent_analysis_on_carpool():
    g = load(*gen_carpool(1, 1, 100, seed=1))
    analysis = FluentAnalysis(g)
    assert g.fluent("(total-traveled car1)") in analysis.irrelevant
    assert analysis.monotone[g.fluent("(fuel car1)")] == 1
    assert analysis.monotone[g.fluent("(load car1)")] == -1


def test_more_fuel_dominates():
    from lazytp.benchgen.carpool import DOMAIN
    g = load(DOMAIN, SMALL_ROAD)
    closed = ClosedList(FluentAnalysis(g))
    base = initial_state(g)
    fuel = g.fluent("(fuel car1)")
    traveled = g.fluent("(total-traveled car1)")
    assert closed.add_if_new(_set(base, {fuel: 40.0}))
    assert not closed.add_if_new(_set(base, {fuel: 30.0}))
    assert not closed.add_if_new(_set(base, {fuel: 40.0, traveled: 99.0}))
    assert closed.add_if_new(_set(base, {fuel: 45.0}))


def _set(state, changes):
    literal = dict(state.tracker.literal)
    literal.update(changes)
    return type(state)(facts=state.facts, tracker=state.tracker.__class__.initial(literal),
                       bounds={}, history=(), running=(), stn=state.stn)


def test_without_dominance_key_is_exact():
    from lazytp.benchgen.carpool import DOMAIN
    g = load(DOMAIN, SMALL_ROAD)
    closed = ClosedList(None)
    fuel = g.fluent("(fuel car1)")
    base = initial_state(g)
    assert closed.add_if_new(_set(base, {fuel: 40.0}))
    assert closed.add_if_new(_set(base, {fuel: 30.0}))
    assert not closed.add_if_new(_set(base, {fuel: 30.0}))


def test_own_drift_dead_end_is_detected_at_root():
    domain = """(define (domain drain)
      (:requirements :durative-actions :fluents :continuous-effects)
      (:predicates (done))
      (:functions (f))
      (:durative-action sip
        :parameters ()
        :duration (= ?duration 3)
        :condition (over all (>= (f) 1))
        :effect (and (at end (done)) (decrease (f) (* #t 1)))))"""
    problem = "(define (problem p) (:domain drain) (:init (= (f) %s)) (:goal (done)))"
    planner = Planner(load(domain, problem % 1))
    assert planner.solve().status == "unsolvable"
    assert planner.stats.states_expanded == 0
    assert plan(load(domain, problem % 5)).status == "solved"


@pytest.mark.parametrize("strategy,write_back,expected", [
    ("always-lp", False, "lp"),   # the LP rejects the happening that closes the conflict
    ("always-lp", True, "stn"),   # the written-back bound lets the network reject it
    ("lazy", True, "stn"),
    ("lazy", False, None),        # purely temporal conflict, no LP triggered on the way
])
def test_overlap_sequence_rejection(strategy, write_back, expected):
    from helpers import OVERLAP_SEQUENCE, overlap_problem
    g = overlap_problem()
    gen = SuccessorGenerator(g, SearchConfig(strategy=strategy, write_back=write_back),
                             LpRunner(make_solver("simplex")))
    _, pruned = run_sequence(g, gen, OVERLAP_SEQUENCE)
    assert (pruned.reason if pruned is not None else None) == expected


def test_final_schedule_rejects_what_lazy_search_let_through():
    from helpers import overlap_problem
    g = overlap_problem()
    result = plan(g, SearchConfig(strategy="lazy", write_back=False))
    assert result.status == "solved"
    assert validate(g, result.plan_text()).valid
