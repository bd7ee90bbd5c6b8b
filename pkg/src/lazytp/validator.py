"""Plan validation by direct simulation of piecewise-linear change.

The simulator walks the happenings in time order.  Between happenings every
fluent moves at the summed rate of the running continuous effects, and
numeric invariants are tested at both ends of every such segment, which is
enough when conditions and trajectories are linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import MalformedPlan, UnboundFluent
from .expr import DURATION, evaluate_tree
from .model import (END, INSTANT, START, ConflictingEffects, GroundedProblem, apply_discrete,
                    compare)
from .planio import TimedStep, normalise_label, parse_plan

EPSILON = 0.001
SEPARATION_TOLERANCE = 1e-7
TOLERANCE = 1e-6

KINDS = ("precondition", "invariant", "duration", "separation", "goal", "runningAtEnd")


@dataclass(frozen=True)
class Failure:
    time: float
    kind: str
    detail: str


@dataclass
class Verdict:
    failures: list = field(default_factory=list)
    final_values: dict = field(default_factory=dict)
    final_facts: frozenset = frozenset()

    @property
    def valid(self) -> bool:
        return not self.failures

    def kinds(self) -> set:
        return {f.kind for f in self.failures}

    def report(self) -> str:
        if self.valid:
            return "plan valid\n"
        lines = ["plan invalid"]
        for f in self.failures:
            lines.append(f"  t={f.time:.9f} {f.kind}: {f.detail}")
        return "\n".join(lines) + "\n"


@dataclass
class _Event:
    time: float
    endpoint: str
    action: object
    instance: int
    duration: Optional[float]
    order: int


def _events(problem: GroundedProblem, steps: list) -> list[_Event]:
    events = []
    for k, step in enumerate(steps):
        action = problem.find_action(normalise_label(step.label))
        if action is None:
            raise MalformedPlan(f"unknown action {step.label}")
        durative = hasattr(action, "duration")
        if durative:
            if step.duration is None:
                raise MalformedPlan(f"durative action {step.label} has no duration")
            events.append(_Event(step.time, START, action, k, step.duration, 2 * k))
            events.append(_Event(step.time + step.duration, END, action, k, step.duration, 2 * k + 1))
        else:
            if step.duration is not None:
                raise MalformedPlan(f"instantaneous action {step.label} given a duration")
            events.append(_Event(step.time, INSTANT, action, k, None, 2 * k))
    events.sort(key=lambda e: (e.time, e.order))
    return events


def _rates(running: dict, values: dict) -> dict:
    rates: dict = {}
    for (action, _start, _dur) in running.values():
        for ce in action.continuous:
            r = evaluate_tree(ce.rate, values)
            rates[ce.fluent] = rates.get(ce.fluent, 0.0) + r
    return rates


class _Simulator:
    def __init__(self, problem: GroundedProblem, epsilon: float):
        self.problem = problem
        self.epsilon = epsilon
        self.failures: list[Failure] = []

    def fail(self, t, kind, detail):
        self.failures.append(Failure(t, kind, detail))

    def check_invariants(self, t, running, facts, values, where):
        for (action, _start, _dur) in running.values():
            inv = action.inv_cond
            if not inv.facts_hold(facts):
                self.fail(t, "invariant", f"{action.label} fact invariant false {where}")
            for c in inv.numeric:
                if not c.holds(values, TOLERANCE):
                    self.fail(t, "invariant", f"{action.label} numeric invariant false {where}")

    def run(self, steps: list) -> Verdict:
        problem = self.problem
        events = _events(problem, steps)
        facts = problem.init_facts
        values = dict(problem.init_values)
        running: dict = {}
        now = 0.0
        last_time = None
        for ev in events:
            if ev.time < -TOLERANCE:
                self.fail(ev.time, "separation", "happening before time zero")
            gap_ref = 0.0 if last_time is None else last_time
            if ev.time - gap_ref < self.epsilon - SEPARATION_TOLERANCE:
                self.fail(ev.time, "separation",
                          f"only {ev.time - gap_ref:.9g} after the previous happening")
            # continuous change up to this happening
            dt = ev.time - now
            if dt > 0 and running:
                try:
                    rates = _rates(running, values)
                except (UnboundFluent, ZeroDivisionError) as exc:
                    self.fail(ev.time, "precondition", f"continuous rate undefined: {exc}")
                    rates = {}
                for v, r in rates.items():
                    if v not in values:
                        self.fail(ev.time, "precondition", f"continuous effect on undefined fluent {v}")
                        continue
                    values[v] = values[v] + r * dt
                self.check_invariants(ev.time, running, facts, values, "before the happening")
            now = max(now, ev.time)
            last_time = ev.time

            # the happening itself
            action = ev.action
            if ev.endpoint == INSTANT:
                snap = action.snap
            else:
                snap = action.snaps[0] if ev.endpoint == START else action.snaps[1]
            if not snap.pre.holds(facts, values, TOLERANCE):
                self.fail(ev.time, "precondition", f"{snap} precondition false")
            extra = {}
            if ev.endpoint == START:
                self.check_duration(ev, values)
                extra[DURATION] = ev.duration
            elif ev.endpoint == END:
                extra[DURATION] = ev.duration
            try:
                values, facts = apply_discrete(values, facts, snap.eff, extra)
            except (UnboundFluent, ZeroDivisionError, ConflictingEffects) as exc:
                self.fail(ev.time, "precondition", f"{snap} effect not applicable: {exc}")
            if ev.endpoint == START:
                running[ev.instance] = (action, ev.time, ev.duration)
            elif ev.endpoint == END:
                running.pop(ev.instance, None)
            self.check_invariants(ev.time, running, facts, values, "after the happening")

        if running:
            for (action, start, _dur) in running.values():
                self.fail(now, "runningAtEnd", f"{action.label} started at {start} never ends")
        if not problem.goal.holds(facts, values, TOLERANCE):
            self.fail(now, "goal", "goal not satisfied in the final state")
        return Verdict(self.failures, values, facts)

    def check_duration(self, ev: _Event, values: dict):
        action = ev.action
        for dc in action.duration:
            try:
                bound = evaluate_tree(dc.expr, values)
            except (UnboundFluent, ZeroDivisionError):
                self.fail(ev.time, "duration", f"{action.label} duration bound undefined")
                continue
            if not compare(ev.duration - bound, dc.cmp, 0.0, TOLERANCE):
                self.fail(ev.time, "duration",
                          f"{action.label} duration {ev.duration:.9g} violates {dc.cmp} {bound:.9g}")


def validate(problem: GroundedProblem, plan, epsilon: float = EPSILON) -> Verdict:
    """Check a plan given as text or as a list of steps with time/label/duration."""
    if isinstance(plan, str):
        steps = parse_plan(plan)
    else:
        steps = [TimedStep(s.time, s.label, s.duration) for s in plan]
    return _Simulator(problem, epsilon).run(steps)
