import re

import pytest

from lazytp.benchgen import (FAMILIES, gen_carpool, gen_carpool_instance, gen_generator,
                             gen_instance, gen_micro, gen_pump, pump_ladder)
from lazytp.benchgen.carpool import cars_for_instance
from lazytp.pddl import load
from lazytp.search import SearchConfig, plan
from lazytp.validator import validate
from helpers import run_sequence, stn_only_generator


def count_objects(problem_text, type_name):
    block = re.search(r"\(:objects(.*?)\)\s*\(:init", problem_text, re.S).group(1)
    tokens = block.split()
    total = pending = 0
    for k, tok in enumerate(tokens):
        if tok == "-":
            total += pending if tokens[k + 1] == type_name else 0
            pending = 0
        elif k == 0 or tokens[k - 1] != "-":
            pending += 1
    return total


@pytest.mark.parametrize("family", FAMILIES)
def test_same_seed_same_bytes(family):
    assert gen_instance(family, 3, seed=11) == gen_instance(family, 3, seed=11)


def test_different_seed_changes_carpool_data():
    assert gen_carpool(2, 1, 100, seed=1)[1] != gen_carpool(2, 1, 100, seed=2)[1]


def test_carpool_shapes():
    _, first = gen_carpool(1, 1, 100, seed=1)
    assert count_objects(first, "trip") == 1 and count_objects(first, "car") == 1
    assert count_objects(first, "location") == 100
    _, last = gen_carpool(20, 4, 100, seed=1)
    assert count_objects(last, "trip") == 20 and count_objects(last, "car") == 4
    assert cars_for_instance(1) == 1 and cars_for_instance(20) == 4
    assert gen_carpool_instance(20, seed=1) == gen_carpool(20, 4, 100, seed=1)


def test_pump_ladder_ends():
    assert pump_ladder(1) == (1, 2, 1)
    assert pump_ladder(20) == (4, 16, 25)
    _, text = gen_pump(4, 16, 25, seed=1)
    assert count_objects(text, "pump") == 4
    assert count_objects(text, "process") == 16
    assert count_objects(text, "task") == 25


def test_flow_change_retunes_running_fill():
    g = load(*gen_pump(1, 2, 1, seed=1))
    gen = stn_only_generator(g)
    states, pruned = run_sequence(g, gen, [("start-pump", "instant"), ("fill", "start"),
                                           ("increase-pump-flow", "instant")])
    assert pruned is None
    (level, rate), = states[2].history[-1].rates.items()
    assert rate == pytest.approx(1.0)
    assert states[3].history[-1].rates[level] == pytest.approx(2.0)


def test_flow_change_is_visible_to_the_validator():
    g = load(*gen_pump(1, 2, 1, seed=1))
    text = ("0.001: (start-pump pump1)\n"
            "0.002: (fill proc1) [4]\n"
            "1.002: (increase-pump-flow pump1)\n")
    verdict = validate(g, text)
    # one unit for the first time unit, two per unit for the remaining three
    assert verdict.final_values[g.fluent("(level proc1)")] == pytest.approx(7.0)


def test_generator_data_forces_refuelling():
    assert "(= (fuelLevel gen) 22)" in gen_generator(1)[1]
    assert "(= (gen-duration gen) 22)" in gen_generator(1)[1]
    assert "tank" not in gen_generator(0)[1].split("(:init")[0].split("(:objects")[1]


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("n", [1, 2])
def test_small_instances_solve_and_validate(family, n):
    g = load(*gen_instance(family, n, seed=1))
    result = plan(g, SearchConfig(timeout=120))
    assert result.status == "solved"
    assert validate(g, result.plan_text()).valid


@pytest.mark.slow
@pytest.mark.parametrize("family", ["pump", "generator"])
@pytest.mark.parametrize("n", [3, 4, 5])
def test_ladder_up_to_five_solves(family, n):
    g = load(*gen_instance(family, n, seed=1))
    result = plan(g, SearchConfig(timeout=300))
    assert result.status == "solved"
    assert validate(g, result.plan_text()).valid


def test_micro_problems_parse():
    for seed in range(30):
        g = load(*gen_micro(seed))
        assert g.durative_actions or g.instant_actions
