"""Schedule-dependency tracking and LP encodings of plan prefixes.

A plan prefix is a sequence of :class:`Happening` records.  Record ``j``
(1-based, matching STN node ``j``) stores the linearised discrete updates of
its snap action, the dependency tracker after the happening and the
cumulative continuous rates that hold until the next happening.

Two encoders build the same feasible set over time points:

* ``full`` gives every ever-schedule-dependent fluent a before/after value
  variable at every happening, linked by rate rows between happenings and
  update rows at happenings.
* ``optimized`` carries each fluent as a linear expression and only mints a
  variable when a discrete update produces a schedule-dependent value.
  Invariants are only checked where they can become tighter.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (NonconstantRate, NonlinearExpression, NonlinearUnderSchedule, NumericalFailure,
                     UnboundFluent)
from .expr import DURATION, TOTAL_TIME, LinearExpression, linearize
from .lp import LinearProgramModel, LpSolver, SimplexSolver, Status, to_lp_format
from .model import END, START, GroundedProblem, NumericCondition, SnapAction, compare

INF = math.inf
COLLAPSE_WIDTH = 1e-9
WRITE_BACK_SLACK = 1e-6


@dataclass(frozen=True)
class DependencyTracker:
    """Which fluents are schedule dependent after a happening, and the literal rest."""

    theta: frozenset = frozenset()
    literal: dict = field(default_factory=dict, hash=False, compare=False)
    first_dependent_at: dict = field(default_factory=dict, hash=False, compare=False)
    last_effect_at: dict = field(default_factory=dict, hash=False, compare=False)
    ever: frozenset = frozenset()

    @classmethod
    def initial(cls, values: dict) -> "DependencyTracker":
        return cls(frozenset(), dict(values), {}, {}, frozenset())

    def value_bounds(self, fluent: int, bounds: dict) -> Optional[tuple[float, float]]:
        if fluent in self.literal:
            v = self.literal[fluent]
            return v, v
        return bounds.get(fluent)

    def collapse(self, fluent: int, value: float) -> "DependencyTracker":
        literal = dict(self.literal)
        literal[fluent] = value
        return DependencyTracker(self.theta - {fluent}, literal, self.first_dependent_at,
                                 self.last_effect_at, self.ever)


@dataclass(frozen=True)
class RunningAction:
    action: int
    start: int  # STN node of the start happening
    lb: float
    ub: float
    duration_var: bool = False  # start effects read a flexible ?duration

    @property
    def fixed(self) -> bool:
        return self.ub - self.lb <= COLLAPSE_WIDTH


@dataclass(frozen=True)
class Happening:
    index: int
    snap: SnapAction
    start_index: Optional[int]  # end snaps: node of the matching start
    duration: Optional[tuple]  # (lb, ub) of the owning durative instance
    duration_var: bool
    updates: dict  # fluent -> LinearExpression over pre-values of theta fluents and DURATION
    tracker: DependencyTracker
    rates: dict  # fluent -> rate holding until the next happening
    running: tuple  # RunningAction after this happening


def _base_value(fluent: int, theta, literal) -> LinearExpression:
    if fluent in theta:
        return LinearExpression.var(fluent)
    if fluent in literal:
        return LinearExpression.const(literal[fluent])
    raise UnboundFluent(fluent)


def track(tracker: DependencyTracker, problem: GroundedProblem, snap: SnapAction, index: int,
          running_after: Iterable[RunningAction], duration: Optional[float] = None
          ) -> tuple[DependencyTracker, dict, dict]:
    """Advance the dependency tracker over one happening.

    ``duration`` is the owning action's duration when it is fixed; ``None``
    keeps ``?duration`` symbolic.  Returns ``(tracker, updates, rates)``.
    """
    theta = tracker.theta
    read = dict(tracker.literal)
    if duration is not None:
        read[DURATION] = duration
    updates: dict = {}
    for eff in snap.eff.numeric:
        try:
            rv = linearize(eff.rvalue, read)
        except NonlinearExpression as exc:
            raise NonlinearUnderSchedule(f"non-linear update of fluent {eff.fluent}: {exc}") from None
        for key in rv.terms:
            if key != DURATION and key not in theta:
                raise UnboundFluent(key)
        if eff.op == ":=":
            new = rv
        elif eff.op in ("+=", "-="):
            base = _base_value(eff.fluent, theta, tracker.literal)
            new = base + rv if eff.op == "+=" else base - rv
        else:
            if not rv.is_constant:
                raise NonlinearUnderSchedule(f"{eff.op} with a schedule-dependent rvalue")
            base = _base_value(eff.fluent, theta, tracker.literal)
            if eff.op == "*=":
                new = base * rv.constant
            else:
                if rv.constant == 0.0:
                    raise ZeroDivisionError("division by zero in /= effect")
                new = base * (1.0 / rv.constant)
        updates[eff.fluent] = new

    theta_post = set(theta)
    literal = dict(tracker.literal)
    first = dict(tracker.first_dependent_at)
    last = dict(tracker.last_effect_at)
    for v, new in updates.items():
        last[v] = index
        if new.is_constant:
            theta_post.discard(v)
            literal[v] = new.constant
        else:
            theta_post.add(v)
            literal.pop(v, None)

    rates: dict = {}
    for ra in running_after:
        for ce in problem.durative_actions[ra.action].continuous:
            try:
                lin = linearize(ce.rate, literal)
            except NonlinearExpression as exc:
                raise NonconstantRate(str(exc)) from None
            if not lin.is_constant:
                raise NonconstantRate(f"rate of fluent {ce.fluent} depends on the schedule")
            if ce.fluent not in literal and ce.fluent not in theta_post:
                raise UnboundFluent(ce.fluent)
            rates[ce.fluent] = rates.get(ce.fluent, 0.0) + lin.constant
            theta_post.add(ce.fluent)
            literal.pop(ce.fluent, None)
    rates = {v: r for v, r in rates.items() if r != 0.0}
    for v in theta_post:
        first.setdefault(v, index)
    new_tracker = DependencyTracker(frozenset(theta_post), literal, first, last,
                                    tracker.ever | frozenset(theta_post))
    return new_tracker, updates, rates


def tracker_at(initial: DependencyTracker, history, j: int) -> DependencyTracker:
    return initial if j == 0 else history[j - 1].tracker


# ---------------------------------------------------------------------------
# encodings


@dataclass
class EncodingStats:
    lp_runs: int = 0
    lp_solves: int = 0
    lp_time: float = 0.0


class PlanEncoding:
    """LP image of a plan prefix (see module docstring for the two modes)."""

    def __init__(self, problem: GroundedProblem, history, initial: DependencyTracker,
                 stn_edges, epsilon: float, mode: str = "optimized"):
        if mode not in ("full", "optimized"):
            raise ValueError(mode)
        self.problem = problem
        self.history = list(history)
        self.initial = initial
        self.epsilon = epsilon
        self.mode = mode
        self.n = len(self.history)
        self.model = LinearProgramModel()
        self.time_var: list[Optional[int]] = [None]
        for j in range(1, self.n + 1):
            self.time_var.append(self.model.add_variable(f"t{j}", 0.0, INF))
        self.value_vars: dict = {}
        self.duration_vars: dict = {}
        self.tracked = sorted(self.history[-1].tracker.ever) if self.n else []
        # pre[j][v] / post[j][v]: LP expression of fluent v before/after happening j
        self.pre: list[dict] = [dict() for _ in range(self.n + 1)]
        self.post: list[dict] = [dict() for _ in range(self.n + 1)]
        for v in self.tracked:
            if v in initial.literal:
                self.post[0][v] = LinearExpression.const(initial.literal[v])
        self._ends = {h.start_index: h.index for h in self.history if h.snap.endpoint == END}
        self._encode_values()
        self._encode_durations()
        self._encode_conditions()
        self._encode_invariants()
        self._encode_stn(stn_edges)

    # helpers ---------------------------------------------------------------
    def time(self, j: int) -> LinearExpression:
        if j == 0:
            return LinearExpression()
        return LinearExpression.var(self.time_var[j])

    def _record(self, j: int) -> Happening:
        return self.history[j - 1]

    def _tracker(self, j: int) -> DependencyTracker:
        return tracker_at(self.initial, self.history, j)

    def _duration_expr(self, j: int) -> LinearExpression:
        h = self._record(j)
        if h.snap.endpoint == END:
            return self.time(j) - self.time(h.start_index)
        var = self.duration_vars.get(j)
        if var is None:
            lb, ub = h.duration
            var = self.model.add_variable(f"d{j}", lb, ub)
            self.duration_vars[j] = var
        return LinearExpression.var(var)

    def _map(self, lin: LinearExpression, j: int, when: str) -> LinearExpression:
        """Translate a fluent-keyed form at point (j, when) to LP terms."""
        table = self.pre[j] if when == "pre" else self.post[j]
        out = LinearExpression.const(lin.constant)
        for key, coef in lin.terms.items():
            if key == DURATION:
                out = out + self._duration_expr(j) * coef
            elif key == TOTAL_TIME:
                out = out + self.time(self.n) * coef
            else:
                try:
                    expr = table[key]
                except KeyError:
                    raise UnboundFluent(key) from None
                if expr is None:
                    raise UnboundFluent(key)
                out = out + expr * coef
        return out

    def _literal_at(self, j: int, when: str) -> dict:
        return self._tracker(j - 1 if when == "pre" else j).literal

    def _new_value_var(self, v: int, j: int, when: str) -> int:
        idx = self.model.add_variable(f"v{v}_{'pre' if when == 'pre' else 'post'}{j}", -INF, INF)
        self.value_vars[(v, j, when)] = idx
        return idx

    def _infeasible(self, why: str):
        self.model.add_row(LinearExpression(), ">=", 1.0, name=why)

    def _condition_row(self, cond: NumericCondition, j: int, when: str, name: str):
        try:
            lin = linearize(cond.expr, self._literal_at(j, when))
        except NonlinearExpression as exc:
            raise NonlinearUnderSchedule(str(exc)) from None
        try:
            mapped = self._map(lin, j, when)
        except UnboundFluent:
            self._infeasible(name + "_undefined")
            return
        if mapped.is_constant:
            if not compare(mapped.constant, cond.cmp, 0.0):
                self._infeasible(name)
            return
        self.model.add_row(mapped, cond.cmp, 0.0, name=name)

    # value propagation -----------------------------------------------------
    def _encode_values(self):
        for j in range(1, self.n + 1):
            h = self._record(j)
            rates_before = self._record(j - 1).rates if j >= 2 else {}
            dt = self.time(j) - self.time(j - 1)
            for v in self.tracked:
                prev = self.post[j - 1].get(v)
                rate = rates_before.get(v, 0.0)
                if self.mode == "full":
                    var = self._new_value_var(v, j, "pre")
                    if prev is not None:
                        row = LinearExpression.var(var) - prev
                        if rate:
                            row = row - dt * rate
                        self.model.add_row(row, "=", 0.0, name=f"flow_{v}_{j}")
                    self.pre[j][v] = LinearExpression.var(var)
                else:
                    if prev is None:
                        self.pre[j][v] = None
                    else:
                        self.pre[j][v] = prev + dt * rate if rate else prev
            theta_post = h.tracker.theta
            literal_post = h.tracker.literal
            for v in self.tracked:
                pre = self.pre[j][v]
                if v in h.updates:
                    update = self._map(h.updates[v], j, "pre")
                else:
                    update = pre
                if self.mode == "full":
                    var = self._new_value_var(v, j, "post")
                    if update is not None:
                        self.model.add_row(LinearExpression.var(var) - update, "=", 0.0,
                                           name=f"jump_{v}_{j}")
                    self.post[j][v] = LinearExpression.var(var)
                else:
                    if v not in theta_post:
                        value = literal_post.get(v)
                        self.post[j][v] = None if value is None else LinearExpression.const(value)
                    elif v in h.updates and update is not None and not update.is_constant:
                        var = self._new_value_var(v, j, "post")
                        self.model.add_row(LinearExpression.var(var) - update, "=", 0.0,
                                           name=f"jump_{v}_{j}")
                        self.post[j][v] = LinearExpression.var(var)
                    else:
                        self.post[j][v] = update

    def _encode_durations(self):
        for j in range(1, self.n + 1):
            h = self._record(j)
            if h.snap.endpoint == START and h.duration_var:
                d = self._duration_expr(j)
                end = self._ends.get(j)
                if end is not None:
                    self.model.add_row(self.time(end) - self.time(j) - d, "=", 0.0,
                                       name=f"dur_{j}")
                else:
                    self.model.add_row(d - (self.time(self.n) - self.time(j)), ">=", self.epsilon,
                                       name=f"pending_{j}")

    def _encode_conditions(self):
        for j in range(1, self.n + 1):
            h = self._record(j)
            for k, cond in enumerate(h.snap.pre.numeric):
                self._condition_row(cond, j, "pre", f"pre_{j}_{k}")

    def _encode_invariants(self):
        for s in range(1, self.n + 1):
            h = self._record(s)
            if h.snap.endpoint != START:
                continue
            inv = self.problem.durative_actions[h.snap.owner].inv_cond.numeric
            if not inv:
                continue
            end = self._ends.get(s)
            last = end if end is not None else self.n
            for k, cond in enumerate(inv):
                for j, when in self._invariant_points(cond, s, end, last):
                    self._condition_row(cond, j, when, f"inv_{s}_{k}_{when}{j}")

    def _invariant_points(self, cond: NumericCondition, s: int, end: Optional[int], last: int):
        points = [(s, "post")]
        if self.mode == "full":
            for j in range(s + 1, last + 1):
                points.append((j, "pre"))
                if j != end:
                    points.append((j, "post"))
            return points
        for j in range(s + 1, last + 1):
            if self._rate_toward(cond, j - 1):
                points.append((j, "pre"))
            if j != end and self._jump_toward(cond, j):
                points.append((j, "post"))
        return points

    def _direction_bad(self, delta: float, cmp: str) -> bool:
        if cmp in (">=", ">"):
            return delta < 0
        if cmp in ("<=", "<"):
            return delta > 0
        return delta != 0

    def _rate_toward(self, cond: NumericCondition, j: int) -> bool:
        """Does the context after happening ``j`` move the expression toward violation?"""
        if j == 0:
            return False
        rates = self._record(j).rates
        if not rates:
            return False
        try:
            lin = linearize(cond.expr, self._tracker(j).literal)
        except NonlinearExpression:
            return True
        slope = sum(coef * rates.get(key, 0.0) for key, coef in lin.terms.items())
        return self._direction_bad(slope, cond.cmp)

    def _jump_toward(self, cond: NumericCondition, j: int) -> bool:
        """Does the discrete change at ``j`` possibly move the expression toward violation?"""
        h = self._record(j)
        if not h.updates:
            return False
        if not (cond.fluents & set(h.updates)):
            return False
        try:
            before = self._map(linearize(cond.expr, self._literal_at(j, "pre")), j, "pre")
            after = self._map(linearize(cond.expr, self._literal_at(j, "post")), j, "post")
        except (NonlinearExpression, UnboundFluent):
            return True
        delta = after - before
        if not delta.is_constant:
            # post-values may be fresh variables equal to pre-value expressions plus a constant
            delta = self._resolve_jump(delta, j)
            if delta is None:
                return True
        return self._direction_bad(delta.constant, cond.cmp)

    def _resolve_jump(self, delta: LinearExpression, j: int) -> Optional[LinearExpression]:
        """Substitute the defining expression of post-variables minted at ``j``."""
        h = self._record(j)
        out = LinearExpression.const(delta.constant)
        for key, coef in delta.terms.items():
            found = None
            for v in h.updates:
                var = self.value_vars.get((v, j, "post"))
                if var == key:
                    found = self._map(h.updates[v], j, "pre")
                    break
            out = out + (found * coef if found is not None else LinearExpression.var(key) * coef)
        return out if out.is_constant else None

    def _encode_stn(self, edges):
        for (i, j, lb, ub) in edges:
            if i > self.n or j > self.n:
                continue
            diff = self.time(j) - self.time(i)
            if lb == ub:
                self.model.add_row(diff, "=", lb, name=f"stn_{i}_{j}")
                continue
            if lb > -INF:
                self.model.add_row(diff, ">=", lb, name=f"stn_{i}_{j}_lb")
            if ub < INF:
                self.model.add_row(diff, "<=", ub, name=f"stn_{i}_{j}_ub")

    # queries ---------------------------------------------------------------
    @property
    def variable_count(self) -> int:
        return self.model.num_variables

    def final_value(self, v: int) -> Optional[LinearExpression]:
        if self.n == 0:
            lit = self.initial.literal.get(v)
            return None if lit is None else LinearExpression.const(lit)
        if v in self.post[self.n]:
            return self.post[self.n][v]
        lit = self._record(self.n).tracker.literal.get(v)
        return None if lit is None else LinearExpression.const(lit)

    def final_form(self, expr) -> LinearExpression:
        """LP form of a fluent expression evaluated after the last happening."""
        literal = self._tracker(self.n).literal
        lin = linearize(expr, literal)
        out = LinearExpression.const(lin.constant)
        for key, coef in lin.terms.items():
            if key == TOTAL_TIME:
                out = out + self.time(self.n) * coef
                continue
            val = self.final_value(key)
            if val is None:
                raise UnboundFluent(key)
            out = out + val * coef
        return out

    def add_goal_rows(self, goal) -> None:
        for k, cond in enumerate(goal.numeric):
            try:
                mapped = self.final_form(cond.expr)
            except NonlinearExpression as exc:
                raise NonlinearUnderSchedule(str(exc)) from None
            except UnboundFluent:
                self._infeasible(f"goal_{k}_undefined")
                continue
            if mapped.is_constant:
                if not compare(mapped.constant, cond.cmp, 0.0):
                    self._infeasible(f"goal_{k}")
                continue
            self.model.add_row(mapped, cond.cmp, 0.0, name=f"goal_{k}")

    def dump(self, title: str = "prefix") -> str:
        return to_lp_format(self.model, title)


def encode_full(problem, history, initial, stn_edges, epsilon=0.001) -> PlanEncoding:
    return PlanEncoding(problem, history, initial, stn_edges, epsilon, "full")


def encode_optimized(problem, history, initial, stn_edges, epsilon=0.001) -> PlanEncoding:
    return PlanEncoding(problem, history, initial, stn_edges, epsilon, "optimized")


# ---------------------------------------------------------------------------
# solving


@dataclass
class ConsistencyResult:
    consistent: bool
    tightenings: list = field(default_factory=list)  # (i, j, lb, ub)
    prepared: object = None


class LpRunner:
    """Runs encodings through a solver while accounting calls and time."""

    def __init__(self, solver: Optional[LpSolver] = None):
        self.solver = solver or SimplexSolver()
        self.stats = EncodingStats()

    def prepare(self, enc: PlanEncoding):
        t0 = time.perf_counter()
        try:
            prepared = self.solver.prepare(enc.model)
        finally:
            self.stats.lp_time += time.perf_counter() - t0
            self.stats.lp_solves += 1
        return prepared

    def optimize(self, prepared, direction: str, expr: LinearExpression):
        t0 = time.perf_counter()
        try:
            return prepared.optimize(direction, expr)
        finally:
            self.stats.lp_time += time.perf_counter() - t0
            self.stats.lp_solves += 1

    def check_consistency(self, enc: PlanEncoding, pairs: Iterable[tuple[int, int]] = ()
                          ) -> ConsistencyResult:
        """Feasibility of the encoding plus LP bounds on ``t_j - t_i`` for each pair."""
        prepared = self.prepare(enc)
        if prepared.status is Status.INFEASIBLE:
            return ConsistencyResult(False)
        tight = []
        for (i, j) in pairs:
            diff = enc.time(j) - enc.time(i)
            lo = self.optimize(prepared, "min", diff)
            hi = self.optimize(prepared, "max", diff)
            lb = lo.objective_value if lo.status is Status.OPTIMAL else -INF
            ub = hi.objective_value if hi.status is Status.OPTIMAL else INF
            tight.append((i, j, lb, ub))
        return ConsistencyResult(True, tight, prepared)

    def extract_bounds(self, enc: PlanEncoding, fluents: Iterable[int], prepared=None) -> dict:
        """Min and max of each fluent's value after the last happening."""
        if prepared is None:
            prepared = self.prepare(enc)
        if prepared.status is Status.INFEASIBLE:
            raise NumericalFailure("bounds requested on an infeasible encoding")
        out = {}
        for v in fluents:
            expr = enc.final_value(v)
            if expr is None:
                continue
            if expr.is_constant:
                out[v] = (expr.constant, expr.constant)
                continue
            lo = self.optimize(prepared, "min", expr)
            hi = self.optimize(prepared, "max", expr)
            out[v] = (lo.objective_value if lo.status is Status.OPTIMAL else -INF,
                      hi.objective_value if hi.status is Status.OPTIMAL else INF)
        return out


def check_consistency(enc: PlanEncoding, pairs=(), solver: Optional[LpSolver] = None):
    return LpRunner(solver).check_consistency(enc, pairs)


def extract_bounds(enc: PlanEncoding, fluents, solver: Optional[LpSolver] = None) -> dict:
    return LpRunner(solver).extract_bounds(enc, fluents)
