import random

import pytest

from lazytp.errors import PoisonedStn
from lazytp.stn import INF, Stn, Verdict
from helpers import random_network
from oracles import floyd_warshall


def test_single_constraint_bounds():
    stn = Stn()
    a = stn.add_happening()
    b = stn.add_happening()
    assert stn.add_constraint(a, b, 2, 5)
    assert stn.bounds(a, b) == (2, 5)
    assert stn.bounds(0, b)[0] == 2  # b >= a + 2 >= 2


def test_negative_cycle_poisons():
    stn = Stn()
    a = stn.add_happening()
    b = stn.add_happening()
    stn.add_constraint(a, b, 1, 2)
    assert stn.add_constraint(b, a, 0, INF) is Verdict.INCONSISTENT
    assert not stn.is_consistent()
    with pytest.raises(PoisonedStn):
        stn.bounds(a, b)


def test_tighten_ignores_implied_bounds():
    stn = Stn()
    a = stn.add_happening()
    b = stn.add_happening()
    stn.add_constraint(a, b, 0, 10)
    edges = len(stn.edges)
    stn.tighten(a, b, -5, 20)
    assert len(stn.edges) == edges
    stn.tighten(a, b, 0, 3)
    assert stn.bounds(a, b) == (0, 3)


def test_clone_is_independent():
    stn = Stn()
    a = stn.add_happening()
    copy = stn.clone()
    copy.add_constraint(0, a, 5, 6)
    assert stn.bounds(0, a) == (0, INF)


def test_dot_lists_finite_edges():
    stn = Stn()
    a = stn.add_happening()
    stn.add_constraint(0, a, 1, 4)
    dot = stn.to_dot()
    assert dot.startswith("digraph stn {") and 'n0 -> n1 [label="4"]' in dot


@pytest.mark.parametrize("seed", range(60))
def test_matches_floyd_warshall(seed):
    rng = random.Random(seed)
    nodes = rng.randint(2, 12)
    stn, constraints, verdict = random_network(rng, nodes)
    expected = floyd_warshall(nodes, constraints)
    assert (expected is None) == (verdict is Verdict.INCONSISTENT)
    if expected is None:
        return
    for i in range(nodes):
        for j in range(nodes):
            assert stn.dist[i, j] == pytest.approx(expected[i][j], abs=1e-9)
