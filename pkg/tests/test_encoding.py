import random

import pytest

from lazytp.benchgen import gen_generator, gen_micro
from lazytp.encoding import DependencyTracker, LpRunner
from lazytp.pddl import load
from helpers import encode, overlap_problem, random_prefixes, run_sequence, stn_only_generator


def test_generator_prefix_value_variables():
    g = load(*gen_generator(1))
    states, pruned = run_sequence(g, stn_only_generator(g), [
        ("generate", "start"), ("refuel", "start"), ("refuel", "end")])
    assert pruned is None
    last = states[-1]
    full, opt = encode(g, last, "full"), encode(g, last, "optimized")
    m = len(last.history[-1].tracker.ever)
    n = last.n
    assert full.variable_count >= n * (2 * m + 1)
    assert opt.variable_count < n * (2 * m + 1)


def test_refuel_end_fuel_bounds():
    # After refuel ends, fuel = 22 - gap - d/12, where gap is the time from the
    # generate start to the refuel start (>= 0.001) and d in [8, 12] (the
    # 11-unit tank empties after 12 units at rate 11/12).
    g = load(*gen_generator(1))
    states, _ = run_sequence(g, stn_only_generator(g), [
        ("generate", "start"), ("refuel", "start"), ("refuel", "end")])
    enc = encode(g, states[-1], "optimized")
    fuel = g.fluent("(fuellevel gen)")
    lo, hi = LpRunner().extract_bounds(enc, [fuel])[fuel]
    # highest: smallest gap and shortest refuel
    assert hi == pytest.approx(22 - 0.001 - 8 / 12, abs=1e-6)
    # lowest: refuel must end 0.001 before generate does, so gap + d <= 21.999;
    # d = 8 with gap 13.999 beats d = 12 with gap 9.999
    assert lo == pytest.approx(22 - 21.999 + 8 * 11 / 12, abs=1e-6)


def test_overlap_scenario_is_lp_infeasible_only():
    g = overlap_problem()
    from helpers import OVERLAP_SEQUENCE
    states, pruned = run_sequence(g, stn_only_generator(g), OVERLAP_SEQUENCE)
    assert pruned is None and states[-1].stn.is_consistent()
    for mode in ("full", "optimized"):
        assert not LpRunner().check_consistency(encode(g, states[-1], mode)).consistent


def test_write_back_pair_bound():
    g = overlap_problem()
    states, _ = run_sequence(g, stn_only_generator(g), [("a", "start"), ("b", "start")])
    result = LpRunner().check_consistency(encode(g, states[-1], "optimized"), [(1, 2)])
    (_, _, lb, ub), = result.tightenings
    assert lb == pytest.approx(0.001)
    assert ub == pytest.approx(3.0)


@pytest.mark.parametrize("seed", range(8))
def test_modes_agree_on_random_prefixes(seed):
    g = load(*gen_micro(seed))
    rng = random.Random(seed)
    runner = LpRunner()
    for state in random_prefixes(g, rng, walks=6):
        full, opt = encode(g, state, "full"), encode(g, state, "optimized")
        a, b = runner.check_consistency(full), runner.check_consistency(opt)
        assert a.consistent == b.consistent
        if a.consistent:
            fluents = sorted(state.history[-1].tracker.ever)
            fb = runner.extract_bounds(full, fluents, a.prepared)
            ob = runner.extract_bounds(opt, fluents, b.prepared)
            for v in set(fb) & set(ob):
                assert fb[v] == pytest.approx(ob[v], abs=1e-6)


def test_initial_tracker_is_literal():
    t = DependencyTracker.initial({0: 1.0, 1: 2.0})
    assert not t.theta and t.literal == {0: 1.0, 1: 2.0}
