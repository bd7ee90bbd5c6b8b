"""Pump-control family.

Pumps push water into per-process reservoirs through one shared pipe.  The
fill rate is the current total pump flow, so starting, stopping or retuning
a pump while a fill is running changes the slope of that fill.  Tasks either
run while their process is in use (``perform-during``, which forces
concurrency) or after it has finished (``perform-after``).

This domain is a reconstruction written for this package, not a copy of a
published benchmark file; its numbers and exact conditions are our choice.
"""

from __future__ import annotations

import random

from ._text import fmt

DOMAIN = """\
(define (domain pump-control)
  (:requirements :typing :durative-actions :duration-inequalities :fluents
                 :continuous-effects :negative-preconditions)
  (:types pump process task)
  (:predicates (pump-on ?p - pump) (pipe-free) (in-use ?r - process)
               (process-done ?r - process) (task-of ?t - task ?r - process)
               (during-task ?t - task) (after-task ?t - task) (task-done ?t - task))
  (:functions (current-flow-rate) (pump-flow ?p - pump) (flow-step) (max-pressure)
              (level ?r - process) (demand ?r - process) (capacity ?r - process)
              (use-duration ?r - process) (task-duration ?t - task))
  (:action start-pump
    :parameters (?p - pump)
    :precondition (and (not (pump-on ?p))
                       (<= (+ (current-flow-rate) (flow-step)) (max-pressure)))
    :effect (and (pump-on ?p) (increase (current-flow-rate) (flow-step))
                 (assign (pump-flow ?p) (flow-step))))
  (:action stop-pump
    :parameters (?p - pump)
    :precondition (pump-on ?p)
    :effect (and (not (pump-on ?p)) (decrease (current-flow-rate) (pump-flow ?p))
                 (assign (pump-flow ?p) 0)))
  (:action increase-pump-flow
    :parameters (?p - pump)
    :precondition (and (pump-on ?p)
                       (<= (+ (current-flow-rate) (flow-step)) (max-pressure)))
    :effect (and (increase (current-flow-rate) (flow-step))
                 (increase (pump-flow ?p) (flow-step))))
  (:action decrease-pump-flow
    :parameters (?p - pump)
    :precondition (and (pump-on ?p) (>= (pump-flow ?p) (* 2 (flow-step))))
    :effect (and (decrease (current-flow-rate) (flow-step))
                 (decrease (pump-flow ?p) (flow-step))))
  (:durative-action fill
    :parameters (?r - process)
    :duration (and (>= ?duration 1) (<= ?duration 30))
    :condition (and (at start (pipe-free)) (at start (> (current-flow-rate) 0))
                    (over all (<= (level ?r) (capacity ?r))))
    :effect (and (at start (not (pipe-free))) (at end (pipe-free))
                 (increase (level ?r) (* #t (current-flow-rate)))))
  (:durative-action use
    :parameters (?r - process)
    :duration (= ?duration (use-duration ?r))
    :condition (and (at start (>= (level ?r) (demand ?r)))
                    (at start (not (process-done ?r))))
    :effect (and (at start (in-use ?r)) (at start (decrease (level ?r) (demand ?r)))
                 (at end (not (in-use ?r))) (at end (process-done ?r))))
  (:durative-action perform-during
    :parameters (?t - task ?r - process)
    :duration (= ?duration (task-duration ?t))
    :condition (and (at start (task-of ?t ?r)) (at start (during-task ?t))
                    (over all (in-use ?r)))
    :effect (at end (task-done ?t)))
  (:durative-action perform-after
    :parameters (?t - task ?r - process)
    :duration (= ?duration (task-duration ?t))
    :condition (and (at start (task-of ?t ?r)) (at start (after-task ?t))
                    (at start (process-done ?r)))
    :effect (at end (task-done ?t))))
"""


def pump_ladder(n: int) -> tuple[int, int, int]:
    """(pumps, processes, tasks) of instance ``n`` in 1..20, linear between the ends."""
    if not 1 <= n <= 20:
        raise ValueError("pump instances run from 1 to 20")
    frac = (n - 1) / 19
    return 1 + round(3 * frac), 2 + round(14 * frac), 1 + round(24 * frac)


def gen_pump(pumps: int, processes: int, tasks: int, seed: int = 0) -> tuple[str, str]:
    if min(pumps, processes, tasks) < 1:
        raise ValueError("pumps, processes and tasks must be >= 1")
    rng = random.Random(seed)
    pump = [f"pump{i}" for i in range(1, pumps + 1)]
    proc = [f"proc{i}" for i in range(1, processes + 1)]
    task = [f"task{i}" for i in range(1, tasks + 1)]
    init = ["(pipe-free)", "(= (current-flow-rate) 0)", "(= (flow-step) 1)",
            f"(= (max-pressure) {2 * pumps})"]
    for p in pump:
        init.append(f"(= (pump-flow {p}) 0)")
    for r in proc:
        demand = rng.randint(4, 12)
        init += [f"(= (level {r}) 0)", f"(= (demand {r}) {demand})",
                 f"(= (capacity {r}) {demand + rng.randint(4, 10)})",
                 f"(= (use-duration {r}) {rng.randint(6, 12)})"]
    for i, t in enumerate(task):
        r = proc[i % processes] if i < processes else proc[rng.randrange(processes)]
        init.append(f"(task-of {t} {r})")
        init.append("(during-task {})".format(t) if rng.random() < 0.5 else f"(after-task {t})")
        init.append(f"(= (task-duration {t}) {fmt(rng.randint(1, 5))})")
    goal = " ".join(f"(task-done {t})" for t in task)
    problem = (f"(define (problem pump-{pumps}-{processes}-{tasks})\n"
               f"  (:domain pump-control)\n"
               f"  (:objects {' '.join(pump)} - pump\n"
               f"            {' '.join(proc)} - process\n"
               f"            {' '.join(task)} - task)\n"
               f"  (:init\n    " + "\n    ".join(init) + ")\n"
               f"  (:goal (and {goal})))\n")
    return DOMAIN, problem


def gen_pump_instance(n: int, seed: int = 0) -> tuple[str, str]:
    return gen_pump(*pump_ladder(n), seed=seed)
