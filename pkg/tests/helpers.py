"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import random

from lazytp.encoding import DependencyTracker, PlanEncoding
from lazytp.errors import NonlinearExpression, NonlinearUnderSchedule, UnboundFluent
from lazytp.pddl import load
from lazytp.search import SearchConfig
from lazytp.search.state import Pruned, SuccessorGenerator, initial_state
from lazytp.encoding import LpRunner
from lazytp.expr import LinearExpression
from lazytp.lp import LinearProgramModel, make_solver
from lazytp.stn import INF, Stn, Verdict

# a and b last 10, c lasts 5 and must fit between the end of a and the end of
# b; b may only start while v <= 3, and v grows at rate 1 while a runs.
OVERLAP_DOMAIN = """\
(define (domain overlap)
  (:requirements :durative-actions :fluents :continuous-effects :negative-preconditions)
  (:predicates (a-started) (a-done) (b-started) (c-started) (c-done))
  (:functions (v))
  (:durative-action a
    :parameters ()
    :duration (= ?duration 10)
    :condition (at start (not (a-started)))
    :effect (and (at start (a-started)) (at end (a-done)) (increase (v) (* #t 1))))
  (:durative-action b
    :parameters ()
    :duration (= ?duration 10)
    :condition (and (at start (a-started)) (at start (not (b-started)))
                    (at start (<= (v) 3)) (at end (c-done)))
    :effect (at start (b-started)))
  (:durative-action c
    :parameters ()
    :duration (= ?duration 5)
    :condition (and (at start (a-done)) (at start (not (c-started))))
    :effect (and (at start (c-started)) (at end (c-done)))))
"""

OVERLAP_PROBLEM = """\
(define (problem overlap-1)
  (:domain overlap)
  (:init (= (v) 0))
  (:goal (c-done)))
"""

# a, b start; a ends; c runs; b ends
OVERLAP_SEQUENCE = [("a", "start"), ("b", "start"), ("a", "end"), ("c", "start"),
                    ("c", "end"), ("b", "end")]


def overlap_problem():
    return load(OVERLAP_DOMAIN, OVERLAP_PROBLEM)


class StnOnlySuccessors(SuccessorGenerator):
    """Successor generator that never consults the LP."""

    def needs_lp(self, parent, snap, child):
        return False


def snap_named(problem, gen, state, name, endpoint):
    for snap in gen.applicable(state):
        if snap.endpoint != endpoint:
            continue
        owner = (problem.instant_actions[snap.owner] if endpoint == "instant"
                 else problem.durative_actions[snap.owner])
        if owner.name == name:
            return snap
    raise LookupError(f"{name} {endpoint} not applicable")


def run_sequence(problem, gen, sequence):
    """Apply (name, endpoint) snaps in order; returns the list of states or a
    Pruned value at the step where the sequence was rejected."""
    state = initial_state(problem)
    states = [state]
    for name, endpoint in sequence:
        child = gen.apply(state, snap_named(problem, gen, state, name, endpoint))
        if isinstance(child, Pruned):
            return states, child
        states.append(child)
        state = child
    return states, None


def stn_only_generator(problem, epsilon=0.001):
    config = SearchConfig(strategy="lazy", write_back=False, epsilon=epsilon)
    return StnOnlySuccessors(problem, config, LpRunner(make_solver("simplex")))


def encode(problem, state, mode, epsilon=0.001):
    return PlanEncoding(problem, state.history, DependencyTracker.initial(problem.init_values),
                        state.stn.edges, epsilon, mode)


def random_prefixes(problem, rng: random.Random, walks: int, max_len: int = 10):
    """Prefixes reached by random walks that only respect facts and the STN."""
    gen = stn_only_generator(problem)
    out = []
    for _ in range(walks):
        state = initial_state(problem)
        for _ in range(rng.randint(1, max_len)):
            options = gen.applicable(state)
            rng.shuffle(options)
            child = None
            for snap in options:
                try:
                    c = gen.apply(state, snap)
                except (NonlinearExpression, NonlinearUnderSchedule, UnboundFluent):
                    continue
                if not isinstance(c, Pruned):
                    child = c
                    break
            if child is None:
                break
            state = child
            out.append(state)
    return out


def random_network(rng, nodes):
    stn = Stn()
    for _ in range(nodes - 1):
        stn.add_happening()
    constraints = []
    verdict = Verdict.CONSISTENT
    for _ in range(rng.randint(1, 3 * nodes)):
        i, j = rng.sample(range(nodes), 2)
        lb = rng.choice([-INF, rng.uniform(-10, 10)])
        ub = rng.choice([INF, rng.uniform(-10, 20)])
        if lb > ub:
            lb, ub = ub, lb
        constraints.append((i, j, lb, ub))
        verdict = stn.add_constraint(i, j, lb, ub)
        if not verdict:
            break
    return stn, constraints, verdict


def random_lp(rng):
    dim = rng.randint(2, 3)
    model = LinearProgramModel()
    box = []
    for k in range(dim):
        lo = rng.uniform(-5, 0)
        hi = lo + rng.uniform(0.5, 10)
        model.add_variable(f"x{k}", lo, hi)
        box.append((lo, hi))
    rows = []
    for _ in range(rng.randint(1, 4)):
        a = [rng.randint(-4, 4) for _ in range(dim)]
        cmp = rng.choice(["<=", ">=", "<=", "="])
        b = rng.uniform(-6, 6)
        model.add_row(LinearExpression(dict(enumerate(map(float, a)))), cmp, b)
        rows.append((a, cmp, b))
    c = [rng.randint(-3, 3) for _ in range(dim)]
    direction = rng.choice(["min", "max"])
    model.set_objective(direction, LinearExpression(dict(enumerate(map(float, c)))))
    return model, c, rows, box, direction
