import random

import pytest

from lazytp.benchgen import gen_carpool, gen_generator
from lazytp.errors import NonlinearExpression, UnboundFluent
from lazytp.expr import BinOp, Const, LinearExpression, Neg, Ref, evaluate_tree, linearize
from lazytp.model import (END, START, ConflictingEffects, Effects, NumericEffect, apply_discrete,
                          evaluate, snap_actions)
from lazytp.pddl import load


def test_evaluate_linear_expression():
    e = LinearExpression({0: 0.6}, 1.0)
    assert evaluate(e, {0: 5.0}) == pytest.approx(4.0)
    assert evaluate(LinearExpression.const(7.0), {}) == 7.0
    with pytest.raises(UnboundFluent):
        evaluate(e, {})


def test_linear_normal_form_drops_zero_terms():
    e = LinearExpression.var(1, 2.0) + LinearExpression.var(1, -2.0) + LinearExpression.var(2)
    assert e.keys() == {2}


def test_apply_discrete_subtracts():
    values, _ = apply_discrete({0: 10.0}, frozenset(), Effects(numeric=(
        NumericEffect(0, "-=", Const(3.0)),)))
    assert values[0] == 7.0


def test_apply_discrete_reads_simultaneously():
    eff = Effects(numeric=(NumericEffect(0, ":=", Ref(1)), NumericEffect(1, ":=", Ref(0))))
    values, _ = apply_discrete({0: 2.0, 1: 5.0}, frozenset(), eff)
    assert values == {0: 5.0, 1: 2.0}


def test_apply_discrete_deletes_before_adds():
    _, facts = apply_discrete({}, frozenset({1}), Effects(adds=frozenset({1}),
                                                          dels=frozenset({1})))
    assert facts == frozenset({1})


def test_double_write_is_rejected():
    eff = Effects(numeric=(NumericEffect(0, "+=", Const(1.0)), NumericEffect(0, "+=", Const(2.0))))
    with pytest.raises(ConflictingEffects):
        apply_discrete({0: 0.0}, frozenset(), eff)


def test_drive_snaps_keep_endpoint_conditions():
    domain, problem = gen_carpool(1, 1, 10, seed=2)
    g = load(domain, problem)
    drive = next(a for a in g.durative_actions if a.name == "drive")
    start, end = snap_actions(drive)
    car, src, dst = drive.args
    assert g.fact(f"(driving-at {car} {src})") in start.pre.pos
    assert g.fact(f"(driving-at {car} {dst})") in end.eff.adds
    assert start.endpoint == START and end.endpoint == END
    assert start.owner == end.owner == drive.index
    assert start.pre == drive.start_cond and end.eff == drive.end_eff


def test_refuel_owner_has_eight_to_fifteen():
    g = load(*gen_generator(1))
    refuel = next(a for a in g.durative_actions if a.name == "refuel")
    assert refuel.duration_bounds(g.init_values) == (8.0, 15.0)


def _random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Const(float(rng.randint(-5, 5)))
        return Ref(rng.randrange(3))
    op = rng.choice("+-*")
    if rng.random() < 0.15:
        return Neg(_random_tree(rng, depth - 1))
    return BinOp(op, _random_tree(rng, depth - 1), _random_tree(rng, depth - 1))


def _to_python(tree):
    if isinstance(tree, Const):
        return repr(tree.value)
    if isinstance(tree, Ref):
        return f"x[{tree.key}]"
    if isinstance(tree, Neg):
        return f"(-{_to_python(tree.arg)})"
    return f"({_to_python(tree.left)} {tree.op} {_to_python(tree.right)})"


def test_tree_and_linear_forms_agree_with_python_arithmetic():
    rng = random.Random(4)
    checked = 0
    for _ in range(400):
        tree = _random_tree(rng, 4)
        x = {k: float(rng.randint(-6, 6)) for k in range(3)}
        expected = eval(_to_python(tree), {"x": x})
        assert evaluate_tree(tree, x) == pytest.approx(expected)
        try:
            lin = linearize(tree)
        except NonlinearExpression:
            continue
        checked += 1
        assert lin.evaluate(x) == pytest.approx(expected)
    assert checked > 50
