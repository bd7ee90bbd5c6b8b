import re

import pytest

from lazytp.benchgen import gen_carpool, gen_generator, gen_micro, gen_pump
from lazytp.errors import PddlSyntaxError, SemanticError, UnsupportedFeature
from lazytp.expr import evaluate_tree
from lazytp.pddl import domain_to_str, ground, load, parse_domain, parse_problem, problem_to_str
from lazytp.pddl import ast
from lazytp.pddl.printer import effect_to_str


def test_drive_listing_parses_with_fuel_rate():
    domain, _ = gen_carpool(1, 1, 10, seed=1)
    d = parse_domain(domain)
    drive = next(a for a in d.durative_actions if a.name == "drive")
    rendered = effect_to_str(drive.effect)
    assert "(decrease (fuel ?c) (* #t (/ (avg-speed ?from ?to) 100)))" in rendered


def test_minimal_instant_action():
    d = parse_domain("(define (domain d) (:action a :parameters () :effect (p)))")
    assert len(d.actions) == 1 and not d.durative_actions
    assert d.actions[0].precondition is None or d.actions[0].precondition == ast.AndCond(())


def test_process_is_unsupported():
    text = "(define (domain d) (:requirements :fluents) (:process p :parameters ()))"
    with pytest.raises(UnsupportedFeature) as err:
        parse_domain(text)
    assert err.value.construct == "process"
    assert err.value.line == 1


def test_unknown_requirement_is_unsupported():
    with pytest.raises(UnsupportedFeature):
        parse_domain("(define (domain d) (:requirements :adl))")


def test_syntax_error_has_position():
    with pytest.raises(PddlSyntaxError) as err:
        parse_domain("(define (domain d)\n  (:action a :parameters ()")
    assert err.value.line is not None
    assert re.match(r"<input>:\d+:\d+: ", str(err.value))


def test_generator_goal_contains_fuel_condition():
    _, problem = gen_generator(1)
    p = parse_problem(problem)
    assert "(>= (fuellevel gen) 10)" in problem_to_str(p).lower()


def test_empty_goal_is_vacuous():
    domain = "(define (domain d) (:predicates (p)))"
    problem = "(define (problem q) (:domain d) (:init) (:goal (and)))"
    g = load(domain, problem)
    assert not g.goal.pos and not g.goal.neg and not g.goal.numeric


def test_undeclared_object_fails_at_grounding():
    domain = "(define (domain d) (:requirements :typing) (:types t) (:predicates (p ?x - t)))"
    problem = "(define (problem q) (:domain d) (:objects a - t) (:init (p b)) (:goal (p a)))"
    p = parse_problem(problem)
    with pytest.raises(SemanticError):
        ground(parse_domain(domain), p)


def test_unary_schema_grounds_once_per_object():
    domain = ("(define (domain d) (:requirements :typing) (:types t) (:predicates (p ?x - t))"
              " (:action a :parameters (?x - t) :effect (p ?x)))")
    problem = "(define (problem q) (:domain d) (:objects o1 o2 - t) (:init) (:goal (and)))"
    g = load(domain, problem)
    assert [a.label for a in g.instant_actions] == ["(a o1)", "(a o2)"]


def test_static_rate_folds_to_constant():
    domain = """(define (domain d) (:requirements :typing :durative-actions :fluents
      :continuous-effects) (:types loc) (:functions (avg-speed ?a ?b - loc) (fuel))
      (:durative-action go :parameters (?a ?b - loc) :duration (= ?duration 1)
        :condition () :effect (decrease (fuel) (* #t (/ (avg-speed ?a ?b) 100)))))"""
    problem = """(define (problem q) (:domain d) (:objects a b - loc)
      (:init (= (avg-speed a b) 60) (= (fuel) 5)) (:goal (and)))"""
    g = load(domain, problem)
    go = next(a for a in g.durative_actions if a.args == ("a", "b"))
    (ce,) = go.continuous
    assert evaluate_tree(ce.rate, {}) == pytest.approx(-0.6)


def test_carpool_drive_count_matches_declared_roads():
    domain, problem = gen_carpool(2, 2, 100, seed=3)
    g = load(domain, problem)
    # independent count straight from the problem text
    roads = set(re.findall(r"\(= \(distance (\S+) (\S+)\) ([0-9.]+)\)", problem))
    positive = {(a, b) for a, b, dist in roads if float(dist) > 0}
    cars = len(re.findall(r"\bcar\d+\b", problem.split("(:init")[0]))
    drives = [a for a in g.durative_actions if a.name == "drive"]
    assert len(drives) == cars * len(positive)


def test_identifiers_are_case_insensitive():
    domain = "(define (domain D) (:predicates (P)) (:action A :parameters () :effect (p)))"
    problem = "(define (problem Q) (:domain d) (:init) (:goal (P)))"
    g = load(domain, problem)
    assert g.instant_actions[0].label == "(a)"


@pytest.mark.parametrize("make", [
    lambda: gen_carpool(3, 2, 30, seed=5),
    lambda: gen_pump(2, 4, 5, seed=2),
    lambda: gen_generator(3),
    lambda: gen_micro(11),
])
def test_print_parse_round_trip(make):
    domain, problem = make()
    d1, p1 = parse_domain(domain), parse_problem(problem)
    d2, p2 = parse_domain(domain_to_str(d1)), parse_problem(problem_to_str(p1))
    assert d1 == d2
    assert p1 == p2


def test_grounding_is_deterministic():
    domain, problem = gen_carpool(2, 2, 20, seed=9)
    a = [x.label for x in load(domain, problem).durative_actions]
    b = [x.label for x in load(domain, problem).durative_actions]
    assert a == b
    assert a == sorted(a, key=lambda s: (s.split()[0], s))
