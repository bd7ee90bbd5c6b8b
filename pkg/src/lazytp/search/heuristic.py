"""Interval-relaxed FF-style heuristic over snap actions.

Delete effects become "negated fact" achievers, so a relaxed state only
grows.  Numeric fluents are intervals that absorb every effect applied so
far; continuous effects widen by rate times the longest possible duration.
Each durative action is split into its snaps, with the end snap gated on a
synthetic "running" fact added by the start snap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import UnboundFluent
from ..expr import DURATION, evaluate_tree, interval_eval, refs
from ..model import END, START, GroundedProblem

INF = math.inf
LAYER_CAP = 100
UNREACHED_ESTIMATE = 1e6
WIDEN_TOL = 1e-9


@dataclass
class _RelaxedAction:
    snap: object
    pos: tuple  # relaxed fact ids required
    numeric: tuple
    adds: tuple  # relaxed fact ids achieved
    numeric_eff: tuple
    continuous: tuple  # (fluent, rate expr)
    durative: Optional[object]
    cost: int  # 2 for a start snap (its end must follow), else 1
    reads: frozenset = frozenset()  # fluents the effect magnitudes depend on
    # end snaps: invariant that must survive the action's own drift, and that drift
    drift_inv: tuple = ()
    drift: tuple = ()  # (fluent, lo, hi)


class RelaxedPlanHeuristic:
    def __init__(self, problem: GroundedProblem):
        self.problem = problem
        nf = len(problem.facts)
        self.nf = nf
        self.preferred: frozenset = frozenset()
        self.neg_base = nf
        self.run_base = 2 * nf
        self.written = _written_fluents(problem)
        self.running_now: frozenset = frozenset()
        self.actions: list[_RelaxedAction] = []
        for a in problem.instant_actions:
            self._add(a.snap, None, cost=1)
        for a in problem.durative_actions:
            start, end = a.snaps
            self._add(start, a, cost=2, extra_adds=(self.run_base + a.index,))
            self._add(end, a, cost=0, extra_pre=(self.run_base + a.index,))
            if self.actions and self.actions[-1].snap is end:
                self._attach_drift(self.actions[-1], a)
        self.by_fact: dict[int, list[int]] = {}
        for i, ra in enumerate(self.actions):
            for f in ra.pos:
                self.by_fact.setdefault(f, []).append(i)
        goal = problem.goal
        self.goal_facts = tuple(goal.pos) + tuple(self.neg_base + f for f in goal.neg)
        self.goal_numeric = goal.numeric
        self.goal_unsat = goal.unsatisfiable
        self.writers: dict[int, list[int]] = {}
        for i, ra in enumerate(self.actions):
            for e in ra.numeric_eff:
                self.writers.setdefault(e.fluent, []).append(i)
            for fl, _ in ra.continuous:
                self.writers.setdefault(fl, []).append(i)

    def _add(self, snap, durative, cost, extra_adds=(), extra_pre=()):
        if snap.pre.unsatisfiable:
            return
        pos, neg, numeric = set(snap.pre.pos), set(snap.pre.neg), tuple(snap.pre.numeric)
        cont = ()
        reads: set = set()
        if durative is not None and snap.endpoint == START:
            # the invariant has to hold as soon as the action starts
            pos |= durative.inv_cond.pos
            neg |= durative.inv_cond.neg
            numeric += tuple(durative.inv_cond.numeric)
            cont = tuple((ce.fluent, ce.rate) for ce in durative.continuous)
            for _, rate in cont:
                reads.update(refs(rate))
            if cont:
                reads |= durative.duration_fluents
        for e in snap.eff.numeric:
            reads.update(refs(e.rvalue))
            if e.op in ("*=", "/="):
                reads.add(e.fluent)
        reads = {k for k in reads if isinstance(k, int)}
        if durative is not None and any(DURATION in e.reads for e in snap.eff.numeric):
            reads |= durative.duration_fluents
        pre = tuple(sorted(pos)) + tuple(self.neg_base + f for f in sorted(neg)) + tuple(extra_pre)
        adds = tuple(snap.eff.adds) + tuple(self.neg_base + f for f in snap.eff.dels) + tuple(extra_adds)
        self.actions.append(_RelaxedAction(snap, pre, numeric, adds, snap.eff.numeric,
                                           cont, durative, cost, frozenset(reads)))

    def _attach_drift(self, ra: _RelaxedAction, action) -> None:
        """The invariant still has to hold just before the end, after the action's
        own continuous change over its whole run; only computed when that change
        is fixed by static data."""
        if not action.continuous or not action.inv_cond.numeric:
            return
        if action.duration_fluents & self.written:
            return
        try:
            d_lo, d_hi = action.duration_bounds(self.problem.init_values)
        except (UnboundFluent, ZeroDivisionError):
            return
        if math.isinf(d_hi):
            return
        totals: dict = {}
        for ce in action.continuous:
            if {k for k in refs(ce.rate) if isinstance(k, int)} & self.written:
                return
            try:
                rate = evaluate_tree(ce.rate, self.problem.init_values)
            except (UnboundFluent, ZeroDivisionError):
                return
            lo, hi = totals.get(ce.fluent, (0.0, 0.0))
            a, b = _mul0(rate, d_lo), _mul0(rate, d_hi)
            totals[ce.fluent] = (lo + min(a, b), hi + max(a, b))
        ra.drift_inv = tuple(action.inv_cond.numeric)
        ra.drift = tuple((fl, lo, hi) for fl, (lo, hi) in totals.items())

    def _numeric_ok(self, ra: _RelaxedAction, bounds: dict) -> bool:
        if not all(c.satisfiable(bounds) for c in ra.numeric):
            return False
        if not ra.drift_inv or ra.durative.index in self.running_now:
            return True
        shifted = dict(bounds)
        for fl, lo, hi in ra.drift:
            cur = shifted.get(fl)
            if cur is not None:
                shifted[fl] = (cur[0] + lo, cur[1] + hi)
        return all(c.satisfiable(shifted) for c in ra.drift_inv)

    # ------------------------------------------------------------------
    def _duration_interval(self, durative, bounds) -> tuple[float, float]:
        lb, ub = 0.0, INF
        for dc in durative.duration:
            try:
                lo, hi = interval_eval(dc.expr, bounds)
            except (UnboundFluent, ZeroDivisionError):
                continue
            if dc.cmp in (">=", ">", "="):
                lb = max(lb, lo)
            if dc.cmp in ("<=", "<", "="):
                ub = min(ub, hi)
        return lb, max(lb, ub)

    def _effect_interval(self, ra: _RelaxedAction, bounds: dict):
        """Yield (fluent, interval) pairs that one application can produce."""
        local = bounds
        if ra.durative is not None and any(DURATION in e.reads for e in ra.numeric_eff):
            local = dict(bounds)
            local[DURATION] = self._duration_interval(ra.durative, bounds)
        for e in ra.numeric_eff:
            try:
                rv = interval_eval(e.rvalue, local)
            except (UnboundFluent, ZeroDivisionError):
                continue
            if e.op == ":=":
                yield e.fluent, rv, False
                continue
            cur = bounds.get(e.fluent)
            if cur is None:
                continue
            if e.op == "+=":
                yield e.fluent, (cur[0] + rv[0], cur[1] + rv[1]), True
            elif e.op == "-=":
                yield e.fluent, (cur[0] - rv[1], cur[1] - rv[0]), True
            else:
                # repeated scaling is approximated as a repeated additive change
                yield e.fluent, _mul_div("*" if e.op == "*=" else "/", cur, rv), True
        if ra.continuous:
            _, ub = self._duration_interval(ra.durative, bounds)
            for fl, rate in ra.continuous:
                cur = bounds.get(fl)
                if cur is None:
                    continue
                try:
                    r_lo, r_hi = interval_eval(rate, bounds)
                except (UnboundFluent, ZeroDivisionError):
                    continue
                lo = cur[0] + min(0.0, _mul0(r_lo, ub))
                hi = cur[1] + max(0.0, _mul0(r_hi, ub))
                yield fl, (lo, hi), True

    def __call__(self, state) -> float:
        # snaps of the relaxed plan that are applicable right now ("helpful")
        self.preferred = frozenset()
        if self.goal_unsat:
            return INF
        self.running_now = frozenset(r.action for r in state.running)
        facts = set(state.facts)
        reached_layer: dict[int, int] = {}
        for f in facts:
            reached_layer[f] = 0
        for f in range(self.nf):
            if f not in facts:
                reached_layer[self.neg_base + f] = 0
        for r in state.running:
            reached_layer[self.run_base + r.action] = 0
        bounds = state.all_intervals()
        # running continuous effects may still move their fluents
        for r in state.running:
            action = self.problem.durative_actions[r.action]
            for ce in action.continuous:
                cur = bounds.get(ce.fluent)
                if cur is None:
                    continue
                try:
                    r_lo, r_hi = interval_eval(ce.rate, bounds)
                except (UnboundFluent, ZeroDivisionError):
                    continue
                bounds[ce.fluent] = (cur[0] + min(0.0, _mul0(r_lo, r.ub)),
                                     cur[1] + max(0.0, _mul0(r_hi, r.ub)))

        missing = [0] * len(self.actions)
        for i, ra in enumerate(self.actions):
            missing[i] = sum(1 for f in ra.pos if f not in reached_layer)
        action_layer: dict[int, int] = {}
        achiever: dict[int, int] = {}
        waiting = {i for i, m in enumerate(missing) if m == 0}
        # per-layer widening contributed by additive effects already fired
        grow_up: dict = {}
        grow_down: dict = {}
        magnitude_dependent: list[int] = []

        history = [bounds]  # relaxed numeric bounds at each layer
        layer = 0
        while True:
            if self._goal_reached(reached_layer, bounds):
                break
            if layer >= LAYER_CAP:
                return UNREACHED_ESTIMATE
            fired = [i for i in sorted(waiting) if self._numeric_ok(self.actions[i], bounds)]
            if not fired and not (grow_up or grow_down):
                return INF
            if not fired and not self._growth_can_help(waiting, reached_layer, bounds,
                                                       grow_up, grow_down):
                return INF
            new_bounds = dict(bounds)
            for fl, up in grow_up.items():
                lo, hi = new_bounds[fl]
                new_bounds[fl] = (lo, hi + up)
            for fl, down in grow_down.items():
                lo, hi = new_bounds[fl]
                new_bounds[fl] = (lo - down, hi)
            new_facts = []
            for i in fired:
                waiting.discard(i)
                action_layer[i] = layer
                for f in self.actions[i].adds:
                    if f not in reached_layer:
                        reached_layer[f] = layer + 1
                        achiever[f] = i
                        new_facts.append(f)
                if self.actions[i].reads:
                    magnitude_dependent.append(i)
            # effects whose size depends on fluents are re-evaluated as those widen
            changed = {fl for fl, b in bounds.items() if b != history[-2][fl]} if layer else None
            for i in fired_set_union(fired, magnitude_dependent, changed, self.actions):
                for fl, (lo, hi), additive in self._effect_interval(self.actions[i], bounds):
                    cur = bounds.get(fl)
                    if cur is None:
                        new_bounds[fl] = (lo, hi)
                        continue
                    base = new_bounds.get(fl, cur)
                    new_bounds[fl] = (min(base[0], lo), max(base[1], hi))
                    if additive:
                        up, down = hi - cur[1], cur[0] - lo
                        if up > WIDEN_TOL:
                            grow_up[fl] = max(grow_up.get(fl, 0.0), up)
                        if down > WIDEN_TOL:
                            grow_down[fl] = max(grow_down.get(fl, 0.0), down)
            for f in new_facts:
                for i in self.by_fact.get(f, ()):
                    missing[i] -= 1
                    if missing[i] == 0:
                        waiting.add(i)
            bounds = new_bounds
            history.append(bounds)
            layer += 1

        return float(self._extract(reached_layer, achiever, action_layer, history, state))

    def _growth_can_help(self, waiting, reached, bounds, grow_up, grow_down) -> bool:
        """Could unbounded repetition of the fired additive effects unlock anything?"""
        limit = dict(bounds)
        for fl in grow_up:
            limit[fl] = (limit[fl][0], INF)
        for fl in grow_down:
            limit[fl] = (-INF, limit[fl][1])
        if all(f in reached for f in self.goal_facts) and \
                all(c.satisfiable(limit) for c in self.goal_numeric):
            return True
        return any(self._numeric_ok(self.actions[i], limit) for i in waiting)

    def _goal_reached(self, reached, bounds) -> bool:
        if any(f not in reached for f in self.goal_facts):
            return False
        return all(c.satisfiable(bounds) for c in self.goal_numeric)

    def _extract(self, reached, achiever, action_layer, history, state) -> int:
        chosen: set[int] = set()
        repeats = 0
        agenda = list(self.goal_facts)
        numeric_goals = list(self.goal_numeric)
        done_facts: set = set()
        done_numeric: set = set()
        while agenda or numeric_goals:
            while agenda:
                f = agenda.pop()
                if f in done_facts:
                    continue
                done_facts.add(f)
                if reached.get(f, 0) == 0:
                    continue
                i = achiever[f]
                if i in chosen:
                    continue
                chosen.add(i)
                ra = self.actions[i]
                agenda.extend(ra.pos)
                numeric_goals.extend(ra.numeric)
            if numeric_goals:
                c = numeric_goals.pop()
                if c in done_numeric:
                    continue
                done_numeric.add(c)
                needed = self._numeric_need(c, action_layer, history)
                if needed is None:
                    continue
                i, count = needed
                if i not in chosen:
                    chosen.add(i)
                    ra = self.actions[i]
                    agenda.extend(ra.pos)
                    numeric_goals.extend(ra.numeric)
                repeats += max(0, count - 1)
        # closing a running action is always worth trying early
        self.preferred = frozenset([self.actions[i].snap.key for i in chosen
                                    if action_layer.get(i) == 0]
                                   + [(END, r.action) for r in state.running])
        cost = sum(self.actions[i].cost for i in chosen) + repeats
        # every running action still has to end
        cost += sum(1 for r in state.running
                    if not any(self.actions[i].snap.endpoint == END
                               and self.actions[i].snap.owner == r.action for i in chosen))
        return cost

    def _numeric_need(self, cond, action_layer, history):
        """Earliest writer that helped satisfy ``cond`` and how many layers it worked."""
        first = None
        for k, b in enumerate(history):
            if cond.satisfiable(b):
                first = k
                break
        if not first:
            return None
        best = None
        for fl in cond.fluents:
            for i in self.writers.get(fl, ()):
                lay = action_layer.get(i)
                if lay is not None and lay < first and (best is None or (lay, i) < best):
                    best = (lay, i)
        if best is None:
            return None
        lay, i = best
        return i, first - lay


def fired_set_union(fired, dependent, changed, actions) -> list[int]:
    """Actions to evaluate this layer: the newly fired ones plus earlier ones whose
    effect magnitudes read a fluent whose bounds changed in the last layer."""
    out = list(fired)
    if changed:
        seen = set(fired)
        out.extend(i for i in dependent if i not in seen and actions[i].reads & changed)
    return out


def _written_fluents(problem: GroundedProblem) -> frozenset:
    out: set = set()
    for a in problem.instant_actions:
        out.update(e.fluent for e in a.eff.numeric)
    for a in problem.durative_actions:
        out.update(e.fluent for e in a.start_eff.numeric)
        out.update(e.fluent for e in a.end_eff.numeric)
        out.update(ce.fluent for ce in a.continuous)
    return frozenset(out)


def _mul0(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _mul_div(op: str, a: tuple, b: tuple) -> tuple:
    if op == "*":
        vals = [_mul0(x, y) for x in a for y in b]
    else:
        if b[0] <= 0.0 <= b[1]:
            return (-INF, INF)
        vals = [x / y for x in a for y in b]
    return (min(vals), max(vals))


class GoalCountHeuristic:
    def __init__(self, problem: GroundedProblem):
        self.goal = problem.goal

    def __call__(self, state) -> float:
        missing = len(self.goal.pos - state.facts) + len(self.goal.neg & state.facts)
        for c in self.goal.numeric:
            if c.fluents & state.theta:
                if not c.satisfiable(state.all_intervals()):
                    missing += 1
            elif not c.holds(state.values):
                missing += 1
        return float(missing + len(state.running))


def make_heuristic(name: str, problem: GroundedProblem, config=None) -> Callable:
    if name == "relaxed":
        return RelaxedPlanHeuristic(problem)
    if name == "goal-count":
        return GoalCountHeuristic(problem)
    if name == "blind":
        return lambda state: 0.0
    raise ValueError(f"unknown heuristic {name}")
