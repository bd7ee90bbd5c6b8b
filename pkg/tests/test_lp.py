import random

import pytest

from lazytp.expr import LinearExpression
from lazytp.lp import LinearProgramModel, Status, make_solver, to_lp_format
from helpers import random_lp
from oracles import enumerate_vertices


def check_against_vertices(solver, seed):
    rng = random.Random(seed)
    model, c, rows, box, direction = random_lp(rng)
    expected = enumerate_vertices(c, rows, box, direction)
    sol = solver.solve(model)
    if expected is None:
        assert sol.status is Status.INFEASIBLE
        return False
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(expected, abs=1e-6)
    assert model.violation(sol.values) < 1e-6
    return True


@pytest.mark.parametrize("backend", ["simplex", "highs"])
def test_backends_match_vertex_enumeration(backend):
    solver = make_solver(backend)
    feasible = sum(check_against_vertices(solver, seed) for seed in range(80))
    assert feasible > 20


def test_unbounded_is_reported():
    m = LinearProgramModel()
    x = m.add_variable("x", 0.0)
    m.add_row(LinearExpression.var(x), ">=", 1.0)
    m.set_objective("max", LinearExpression.var(x))
    assert make_solver("simplex").solve(m).status is Status.UNBOUNDED


def test_free_variables_and_equalities():
    m = LinearProgramModel()
    x = m.add_variable("x", -float("inf"))
    y = m.add_variable("y", -float("inf"))
    m.add_row(LinearExpression({x: 1.0, y: 1.0}), "=", -3.0)
    m.add_row(LinearExpression({x: 1.0, y: -1.0}), "<=", 1.0)
    m.set_objective("max", LinearExpression.var(x))
    sol = make_solver("simplex").solve(m)
    assert sol.status is Status.OPTIMAL
    assert sol.values[x] == pytest.approx(-1.0)
    assert sol.values[y] == pytest.approx(-2.0)


def test_prepared_model_reoptimises():
    m = LinearProgramModel()
    x = m.add_variable("x", 0.0, 4.0)
    y = m.add_variable("y", 0.0, 4.0)
    m.add_row(LinearExpression({x: 1.0, y: 1.0}), "<=", 5.0)
    prepared = make_solver("simplex").prepare(m)
    assert prepared.optimize("max", LinearExpression.var(x)).objective_value == pytest.approx(4)
    assert prepared.optimize("min", LinearExpression({x: -1.0, y: -1.0})).objective_value == \
        pytest.approx(-5)


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling LP; Bland's rule must still reach the optimum -0.05
    m = LinearProgramModel()
    xs = [m.add_variable(f"x{k}", 0.0) for k in range(4)]
    m.add_row(LinearExpression(dict(zip(xs, [0.25, -60.0, -0.04, 9.0]))), "<=", 0.0)
    m.add_row(LinearExpression(dict(zip(xs, [0.5, -90.0, -0.02, 3.0]))), "<=", 0.0)
    m.add_row(LinearExpression({xs[2]: 1.0}), "<=", 1.0)
    m.set_objective("min", LinearExpression(dict(zip(xs, [-0.75, 150.0, -0.02, 6.0]))))
    sol = make_solver("simplex").solve(m)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(-0.05)


def test_lp_format_output():
    m = LinearProgramModel()
    x = m.add_variable("t1", 0.0)
    m.add_row(LinearExpression.var(x), ">=", 2.0, name="sep")
    m.set_objective("min", LinearExpression.var(x))
    text = to_lp_format(m)
    assert "Minimize" in text and "Subject To" in text and "sep_0: 1 t1 >= 2" in text and text.rstrip().endswith("End")
