"""Temporal search states and happening application."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

from ..encoding import (COLLAPSE_WIDTH, WRITE_BACK_SLACK, DependencyTracker, Happening, LpRunner,
                        PlanEncoding, RunningAction, track)
from ..errors import (NonconstantRate, NonlinearExpression, NonlinearUnderSchedule,
                      NumericalFailure, UnboundFluent)
from ..expr import DURATION
from ..model import END, START, ConflictingEffects, GroundedProblem, SnapAction
from ..stn import Stn

INF = math.inf
ROUNDING = 1e-6


@dataclass
class SearchConfig:
    strategy: str = "lazy"  # "lazy" | "always-lp"
    encoding: Optional[str] = None  # defaults: lazy -> optimized, always-lp -> full
    epsilon: float = 0.001
    bounds_mode: str = "conditions"  # "conditions" | "all" | "off"
    write_back: Optional[bool] = None  # defaults to True for lazy
    timeout: float = 1800.0
    max_happenings: Optional[int] = None
    weight: Optional[float] = None  # None: greedy best-first; else weighted A*
    heuristic: str = "relaxed"  # "relaxed" | "goal-count" | "blind"
    preferred: bool = True  # second open list for helpful-action successors
    dominance: bool = True  # merge states by fluent relevance and monotonicity
    solver: str = "simplex"
    dump_lp: Optional[str] = None  # directory for LP dumps
    dump_stn: Optional[str] = None

    def __post_init__(self):
        if self.strategy not in ("lazy", "always-lp"):
            raise ValueError(f"unknown strategy {self.strategy}")
        if self.encoding is None:
            self.encoding = "optimized" if self.strategy == "lazy" else "full"
        if self.encoding not in ("optimized", "full"):
            raise ValueError(f"unknown encoding {self.encoding}")
        if self.bounds_mode not in ("conditions", "all", "off"):
            raise ValueError(f"unknown bounds mode {self.bounds_mode}")
        if self.write_back is None:
            self.write_back = self.strategy == "lazy"


@dataclass
class TemporalState:
    facts: frozenset
    tracker: DependencyTracker
    bounds: dict  # theta fluent -> (lo, hi) after the last happening
    history: tuple  # of Happening
    running: tuple  # of RunningAction
    stn: Stn
    lpgc: bool = False
    last_lp: int = 0
    sd_suffix: tuple = ()
    lp_ran: bool = False  # an LP was solved for the happening that produced this state
    id: int = 0

    @property
    def n(self) -> int:
        return len(self.history)

    @property
    def values(self) -> dict:
        return self.tracker.literal

    @property
    def theta(self) -> frozenset:
        return self.tracker.theta

    def interval(self, fluent: int) -> Optional[tuple[float, float]]:
        if fluent in self.tracker.literal:
            v = self.tracker.literal[fluent]
            return (v, v)
        return self.bounds.get(fluent)

    def all_intervals(self) -> dict:
        out = {k: (v, v) for k, v in self.tracker.literal.items()}
        out.update(self.bounds)
        return out

    def running_ids(self) -> frozenset:
        return frozenset(r.action for r in self.running)

    def key(self, literal: Optional[tuple] = None) -> tuple:
        """Duplicate-detection signature; ``literal`` replaces the rounded value part."""
        lit = literal if literal is not None else \
            tuple(sorted((k, round(v / ROUNDING)) for k, v in self.tracker.literal.items()))
        bnd = tuple(sorted((k, _round(lo), _round(hi)) for k, (lo, hi) in self.bounds.items()
                           if k in self.tracker.theta))
        run = tuple(sorted(r.action for r in self.running))
        temporal = ()
        if self.running:
            nodes = [self.n] + [r.start for r in sorted(self.running, key=lambda r: r.action)]
            d = self.stn.dist
            temporal = tuple(_round(float(d[a, b])) for a in nodes for b in nodes if a != b)
        return (self.facts, run, lit, self.tracker.theta, bnd, temporal, self.sd_suffix, self.lpgc)


def _round(x: float):
    if math.isinf(x):
        return x
    return round(x / ROUNDING)


def initial_state(problem: GroundedProblem) -> TemporalState:
    return TemporalState(facts=problem.init_facts,
                         tracker=DependencyTracker.initial(problem.init_values),
                         bounds={}, history=(), running=(), stn=Stn())


@dataclass
class Pruned:
    reason: str
    detail: str = ""

    def __bool__(self):
        return False


# ---------------------------------------------------------------------------
# applicability


class SuccessorGenerator:
    """Applicability tests and happening application for one problem."""

    def __init__(self, problem: GroundedProblem, config: SearchConfig, runner: LpRunner):
        self.problem = problem
        self.config = config
        self.runner = runner
        self.stn_checks = 0
        self.lp_dumps = 0
        self._trigger: dict[int, list] = {}
        self._always: list = []
        snaps = [a.snap for a in problem.instant_actions] + \
                [a.snaps[0] for a in problem.durative_actions]
        for snap in snaps:
            if snap.pre.unsatisfiable:
                continue
            if snap.pre.pos:
                trigger = min(snap.pre.pos)
                self._trigger.setdefault(trigger, []).append(snap)
            else:
                self._always.append(snap)
        self.condition_fluents = problem.condition_fluents

    def lookahead(self, state: TemporalState) -> dict:
        """Optimistic value intervals just before the next happening."""
        intervals = state.all_intervals()
        if not state.history or not state.history[-1].rates:
            return intervals
        rates = state.history[-1].rates
        horizon = INF
        d = state.stn.dist
        for ra in state.running:
            horizon = min(horizon, ra.ub + float(d[state.n, ra.start]))
        lo_dt, hi_dt = self.config.epsilon, max(horizon, self.config.epsilon)
        for v, rate in rates.items():
            lo, hi = intervals.get(v, (-INF, INF))
            if rate > 0:
                intervals[v] = (lo + rate * lo_dt, hi + rate * hi_dt)
            else:
                intervals[v] = (lo + rate * hi_dt, hi + rate * lo_dt)
        return intervals

    def _numeric_ok(self, state, conds, intervals) -> bool:
        for c in conds:
            if c.fluents and not (c.fluents & state.tracker.theta):
                if not c.holds(state.tracker.literal):
                    return False
            elif not c.satisfiable(intervals):
                return False
        return True

    def applicable(self, state: TemporalState) -> list[SnapAction]:
        facts = state.facts
        intervals = None
        running = state.running_ids()
        candidates = list(self._always)
        for f in facts:
            candidates.extend(self._trigger.get(f, ()))
        out = []
        seen = set()
        for snap in candidates:
            if snap.key in seen:
                continue
            seen.add(snap.key)
            if snap.endpoint == START and snap.owner in running:
                continue
            pre = snap.pre
            if not (pre.pos <= facts) or (pre.neg & facts):
                continue
            if pre.numeric:
                if intervals is None:
                    intervals = self.lookahead(state)
                if not self._numeric_ok(state, pre.numeric, intervals):
                    continue
            out.append(snap)
        for ra in state.running:
            snap = self.problem.durative_actions[ra.action].snaps[1]
            pre = snap.pre
            if not (pre.pos <= facts) or (pre.neg & facts) or pre.unsatisfiable:
                continue
            if pre.numeric:
                if intervals is None:
                    intervals = self.lookahead(state)
                if not self._numeric_ok(state, pre.numeric, intervals):
                    continue
            out.append(snap)
        out.sort(key=lambda s: (s.endpoint != END, s.endpoint, s.owner))
        return out

    # application ------------------------------------------------------------
    def apply(self, state: TemporalState, snap: SnapAction) -> TemporalState | Pruned:
        problem = self.problem
        cfg = self.config
        j = state.n + 1
        literal = state.tracker.literal

        # durations and running set
        running = list(state.running)
        ended: Optional[RunningAction] = None
        duration = None
        dur_bounds = None
        if snap.endpoint == START:
            action = problem.durative_actions[snap.owner]
            if action.duration_fluents & state.tracker.theta:
                return Pruned("unsupported", "duration depends on the schedule")
            try:
                lb, ub = action.duration_bounds(literal)
            except (UnboundFluent, ZeroDivisionError) as exc:
                return Pruned("unsupported", f"duration not evaluable: {exc}")
            if lb > ub + COLLAPSE_WIDTH or ub < cfg.epsilon:
                return Pruned("duration", "empty duration range")
            uses_duration = any(e.uses_duration for e in snap.eff.numeric)
            fixed = ub - lb <= COLLAPSE_WIDTH
            running.append(RunningAction(snap.owner, j, lb, ub, uses_duration and not fixed))
            dur_bounds = (lb, ub)
            duration = lb if fixed else None
        elif snap.endpoint == END:
            for ra in running:
                if ra.action == snap.owner:
                    ended = ra
                    break
            if ended is None:
                return Pruned("malformed", "end without start")
            running.remove(ended)
            dur_bounds = (ended.lb, ended.ub)
            duration = ended.lb if ended.fixed else None

        # facts and fact invariants
        facts = (state.facts - snap.eff.dels) | snap.eff.adds
        for ra in running:
            inv = problem.durative_actions[ra.action].inv_cond
            if not inv.facts_hold(facts):
                return Pruned("invariant", "fact invariant violated")

        # discrete numeric effects and dependency tracking
        try:
            tracker, updates, rates = track(state.tracker, problem, snap, j, running, duration)
        except (NonlinearUnderSchedule, NonconstantRate, NonlinearExpression) as exc:
            return Pruned("unsupported", str(exc))
        except (UnboundFluent, ZeroDivisionError, ConflictingEffects) as exc:
            return Pruned("undefined", str(exc))

        # literal numeric invariants after the happening
        for ra in running:
            for c in problem.durative_actions[ra.action].inv_cond.numeric:
                if not (c.fluents & tracker.theta):
                    if not c.holds(tracker.literal):
                        return Pruned("invariant", "numeric invariant violated")

        # temporal network
        stn = state.stn.clone()
        node = stn.add_happening()
        assert node == j
        self.stn_checks += 1
        ok = stn.add_constraint(j - 1, j, cfg.epsilon)
        if ok and ended is not None:
            ok = stn.add_constraint(ended.start, j, ended.lb, ended.ub)
        if ok:
            for ra in running:
                if ra.start != j:
                    ok = stn.add_constraint(ra.start, j, -INF, ra.ub - cfg.epsilon)
                    if not ok:
                        break
        if not ok:
            return Pruned("stn", "temporal network inconsistent")

        record = Happening(index=j, snap=snap, start_index=ended.start if ended else None,
                           duration=dur_bounds,
                           duration_var=(snap.endpoint == START and running[-1].duration_var),
                           updates=updates, tracker=tracker, rates=rates, running=tuple(running))
        history = state.history + (record,)

        # carried-forward bounds
        bounds = self._carry_bounds(state, stn, record)

        child = TemporalState(facts=frozenset(facts), tracker=tracker, bounds=bounds,
                              history=history, running=tuple(running), stn=stn,
                              lpgc=state.lpgc, last_lp=state.last_lp,
                              sd_suffix=(state.sd_suffix + (snap.key,)) if tracker.theta else ())

        run_lp = cfg.strategy == "always-lp" or self.needs_lp(state, snap, child)
        if run_lp:
            verdict = self._run_lp(state, child)
            if isinstance(verdict, Pruned):
                return verdict
        return child

    def _carry_bounds(self, state: TemporalState, stn: Stn, record: Happening) -> dict:
        theta = record.tracker.theta
        if not theta:
            return {}
        prev_rates = state.history[-1].rates if state.history else {}
        dlo, dhi = stn.bounds(record.index - 1, record.index)
        pre = {}
        for v in state.tracker.theta:
            lo, hi = state.bounds.get(v, (-INF, INF))
            rate = prev_rates.get(v, 0.0)
            if rate > 0:
                lo, hi = lo + rate * dlo, hi + rate * dhi
            elif rate < 0:
                lo, hi = lo + rate * dhi, hi + rate * dlo
            pre[v] = (lo, hi)
        for k, val in state.tracker.literal.items():
            pre[k] = (val, val)
        if record.duration is not None:
            pre[DURATION] = record.duration
        out = {}
        for v in theta:
            if v in record.updates:
                try:
                    out[v] = record.updates[v].interval(pre)
                except UnboundFluent:
                    out[v] = (-INF, INF)
            elif v in pre:
                out[v] = pre[v]
            else:
                out[v] = (-INF, INF)
        return out

    # selective LP -----------------------------------------------------------
    def needs_lp(self, parent: TemporalState, snap: SnapAction, child: TemporalState) -> bool:
        """Whether this happening can change the LP verdict or the schedule-dependent bounds."""
        problem = self.problem
        record = child.history[-1]
        theta_pre = parent.tracker.theta
        theta_post = child.tracker.theta
        if not theta_pre and not theta_post:
            return False
        # numeric preconditions over schedule-dependent fluents
        for c in snap.pre.numeric:
            if c.fluents & theta_pre:
                return True
        # schedule-dependent or flexible duration-dependent effects
        for v, upd in record.updates.items():
            if not upd.is_constant or v in theta_pre:
                return True
        # continuous effects starting or ending here
        if snap.endpoint in (START, END) and problem.durative_actions[snap.owner].continuous:
            return True
        # invariants over schedule-dependent fluents at a start, or made tighter here
        if snap.endpoint == START:
            for c in problem.durative_actions[snap.owner].inv_cond.numeric:
                if c.fluents & theta_post:
                    return True
        if record.updates:
            written = set(record.updates)
            for ra in child.running:
                for c in problem.durative_actions[ra.action].inv_cond.numeric:
                    if c.fluents & theta_post and c.fluents & written:
                        return True
        prev_rates = parent.history[-1].rates if parent.history else {}
        if prev_rates:
            for ra in child.running + ((_as_running(record),) if record.snap.endpoint == END else ()):
                if ra is None:
                    continue
                for c in problem.durative_actions[ra.action].inv_cond.numeric:
                    if c.fluents & set(prev_rates):
                        return True
        # a changed rate on a running schedule-dependent fluent
        if prev_rates != record.rates and (set(prev_rates) | set(record.rates)) & theta_post:
            return True
        # end of a flexible action while the schedule matters numerically
        if snap.endpoint == END and record.duration and \
                record.duration[1] - record.duration[0] > COLLAPSE_WIDTH and theta_pre:
            return True
        return False

    def write_back_pairs(self, parent: TemporalState, child: TemporalState) -> list:
        j = child.n
        nodes = {0}
        nodes.update(ra.start for ra in parent.running)
        nodes.update(ra.start for ra in child.running if ra.start != j)
        if parent.last_lp:
            nodes.add(parent.last_lp)
        nodes.discard(j)
        return [(i, j) for i in sorted(nodes)]

    def encode(self, state: TemporalState) -> PlanEncoding:
        return PlanEncoding(self.problem, state.history,
                            DependencyTracker.initial(self.problem.init_values),
                            state.stn.edges, self.config.epsilon, self.config.encoding)

    def _run_lp(self, parent: TemporalState, child: TemporalState) -> Optional[Pruned]:
        cfg = self.config
        try:
            enc = self.encode(child)
        except (NonlinearUnderSchedule, NonlinearExpression) as exc:
            return Pruned("unsupported", str(exc))
        self.runner.stats.lp_runs += 1
        self._dump(enc, child)
        pairs = self.write_back_pairs(parent, child) if cfg.write_back else []
        try:
            result = self.runner.check_consistency(enc, pairs)
        except NumericalFailure as exc:
            return Pruned("numerical", str(exc))
        if not result.consistent:
            return Pruned("lp", "LP infeasible")
        for (i, j, lb, ub) in result.tightenings:
            lo = lb - WRITE_BACK_SLACK if lb > -INF else -INF
            hi = ub + WRITE_BACK_SLACK if ub < INF else INF
            if not child.stn.tighten(i, j, lo, hi):
                return Pruned("stn", "write-back made the network inconsistent")
        child.last_lp = child.n
        child.lp_ran = True
        theta = child.tracker.theta
        if cfg.bounds_mode == "off" or not theta:
            return None
        if cfg.bounds_mode == "all":
            wanted = theta
        else:
            # fluents that stopped moving may have become single-valued
            settled = {v for v in theta if v not in child.history[-1].rates}
            wanted = theta & (self.condition_fluents | settled)
        if not wanted:
            return None
        try:
            fresh = self.runner.extract_bounds(enc, sorted(wanted), result.prepared)
        except NumericalFailure as exc:
            return Pruned("numerical", str(exc))
        bounds = dict(child.bounds)
        bounds.update(fresh)
        continuing = {ce.fluent for ra in child.running
                      for ce in self.problem.durative_actions[ra.action].continuous}
        tracker = child.tracker
        for v, (lo, hi) in fresh.items():
            if v not in continuing and hi - lo <= COLLAPSE_WIDTH:
                tracker = tracker.collapse(v, 0.5 * (lo + hi))
                bounds.pop(v, None)
        if tracker is not child.tracker:
            child.tracker = tracker
            last = dataclasses.replace(child.history[-1], tracker=tracker)
            child.history = child.history[:-1] + (last,)
            if not tracker.theta:
                child.sd_suffix = ()
        child.bounds = bounds
        return None

    def _dump(self, enc: PlanEncoding, state: TemporalState):
        if not self.config.dump_lp:
            return
        import os
        os.makedirs(self.config.dump_lp, exist_ok=True)
        self.lp_dumps += 1
        path = os.path.join(self.config.dump_lp, f"lp-{self.lp_dumps:06d}.lp")
        with open(path, "w") as fh:
            fh.write(enc.dump(f"state {state.id} after {state.n} happenings"))


def _as_running(record: Happening):
    if record.start_index is None:
        return None
    lb, ub = record.duration
    return RunningAction(record.snap.owner, record.start_index, lb, ub)
