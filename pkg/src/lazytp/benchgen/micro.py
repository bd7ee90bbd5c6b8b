"""Small random temporal-numeric problems for differential testing.

Each action owns a single-use token, so the reachable state space is finite
and every plan has at most twice as many happenings as there are actions.
"""

from __future__ import annotations

import random

from ._text import fmt

REQUIREMENTS = (":typing :durative-actions :duration-inequalities :fluents "
                ":continuous-effects :negative-preconditions")


def _cmp_condition(rng: random.Random, fluent: str, lo: int, hi: int) -> str:
    """A comparison that is loose more often than not: ``>=`` draws from the
    lower part of ``[lo, hi]`` and ``<=`` from the upper part."""
    mid = (lo + hi) // 2
    if rng.random() < 0.5:
        return f"(>= ({fluent}) {rng.randint(lo, mid)})"
    return f"(<= ({fluent}) {rng.randint(mid, hi)})"


def gen_micro(seed: int, max_fluents: int = 4, max_actions: int = 6) -> tuple[str, str]:
    rng = random.Random(seed)
    n_fluents = rng.randint(1, max_fluents)
    n_actions = rng.randint(2, max_actions)
    fluents = [f"f{i}" for i in range(n_fluents)]
    actions = []
    for i in range(n_actions):
        name = f"act{i}"
        pre = [f"(tok{i})"]
        if i > 0 and rng.random() < 0.3:
            pre.append(f"(done{rng.randrange(i)})")
        f = rng.choice(fluents)
        if rng.random() < 0.75:
            # durative
            if rng.random() < 0.5:
                dur = f"(= ?duration {rng.randint(1, 6)})"
            else:
                lo = rng.randint(1, 4)
                dur = f"(and (>= ?duration {lo}) (<= ?duration {lo + rng.randint(1, 6)}))"
            cond = [f"(at start {p})" for p in pre]
            if rng.random() < 0.4:
                cond.append(f"(at start {_cmp_condition(rng, rng.choice(fluents), 0, 8)})")
            if rng.random() < 0.4:
                cond.append(f"(over all {_cmp_condition(rng, rng.choice(fluents), -4, 12)})")
            if rng.random() < 0.3:
                cond.append(f"(at end {_cmp_condition(rng, rng.choice(fluents), 0, 12)})")
            eff = [f"(at start (not (tok{i})))", f"(at end (done{i}))"]
            if rng.random() < 0.6:
                kind = rng.choice(["increase", "decrease"])
                rate = rng.choice([0.5, 1, 2])
                eff.append(f"({kind} ({f}) (* #t {fmt(rate)}))")
            roll = rng.random()
            g = rng.choice(fluents)
            if roll < 0.25:
                eff.append(f"(at end (increase ({g}) {rng.randint(1, 4)}))")
            elif roll < 0.45:
                eff.append(f"(at end (decrease ({g}) (* ?duration {fmt(rng.choice([0.5, 1]))})))")
            elif roll < 0.55:
                eff.append(f"(at start (assign ({g}) {rng.randint(0, 6)}))")
            actions.append(
                f"  (:durative-action {name}\n    :parameters ()\n    :duration {dur}\n"
                f"    :condition (and {' '.join(cond)})\n"
                f"    :effect (and {' '.join(eff)}))")
        else:
            conds = list(pre)
            if rng.random() < 0.5:
                conds.append(_cmp_condition(rng, rng.choice(fluents), 0, 8))
            op = rng.choice(["increase", "decrease", "assign"])
            eff = [f"(not (tok{i}))", f"(done{i})", f"({op} ({f}) {rng.randint(1, 5)})"]
            actions.append(
                f"  (:action {name}\n    :parameters ()\n"
                f"    :precondition (and {' '.join(conds)})\n"
                f"    :effect (and {' '.join(eff)}))")
    preds = " ".join(f"(tok{i}) (done{i})" for i in range(n_actions))
    funcs = " ".join(f"({f})" for f in fluents)
    domain = (f"(define (domain micro-{seed})\n  (:requirements {REQUIREMENTS})\n"
              f"  (:predicates {preds})\n  (:functions {funcs})\n" + "\n".join(actions) + ")\n")
    init = [f"(tok{i})" for i in range(n_actions)]
    init += [f"(= ({f}) {rng.randint(0, 5)})" for f in fluents]
    goal_done = rng.sample(range(n_actions), rng.randint(1, min(3, n_actions)))
    goal = [f"(done{i})" for i in sorted(goal_done)]
    if rng.random() < 0.6:
        goal.append(_cmp_condition(rng, rng.choice(fluents), 0, 10))
    problem = (f"(define (problem micro-{seed}-p)\n  (:domain micro-{seed})\n"
               f"  (:init {' '.join(init)})\n  (:goal (and {' '.join(goal)})))\n")
    return domain, problem
