"""Forward best-first search over temporal states."""

from __future__ import annotations

import heapq
import itertools
import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional

from ..encoding import LpRunner
from ..errors import NonlinearExpression, NonlinearUnderSchedule, NumericalFailure, UnboundFluent
from ..expr import TOTAL_TIME, evaluate_tree
from ..lp import Status, make_solver
from ..model import END, INSTANT, START, GroundedProblem
from .heuristic import make_heuristic
from .pruning import ClosedList, FluentAnalysis
from .state import Pruned, SearchConfig, SuccessorGenerator, TemporalState, initial_state

SOLVED = "solved"
UNSOLVABLE = "unsolvable"
TIMEOUT = "timeout"
PREFERRED_BOOST = 1000


@dataclass
class PlanStep:
    time: float
    label: str
    duration: Optional[float] = None

    def __str__(self):
        base = f"{self.time:.9f}: {self.label}"
        return base if self.duration is None else f"{base} [{self.duration:.9f}]"


@dataclass
class SearchStats:
    states_expanded: int = 0
    states_generated: int = 0
    duplicates: int = 0
    pruned: dict = field(default_factory=dict)
    lp_goal_checks: int = 0
    gated_goal_candidates: int = 0
    fact_goal_states: int = 0
    schedule_failures: int = 0


@dataclass
class PlanResult:
    status: str
    plan: list = field(default_factory=list)
    happenings: list = field(default_factory=list)  # (time, SnapAction) per happening
    makespan: float = 0.0
    metric_value: Optional[float] = None
    search: SearchStats = field(default_factory=SearchStats)
    lp_runs: int = 0
    lp_solves: int = 0
    lp_time: float = 0.0
    stn_checks: int = 0
    total_time: float = 0.0
    final_state: Optional[TemporalState] = None

    @property
    def plan_happenings(self) -> int:
        return len(self.happenings)

    def stats(self) -> dict:
        return {
            "status": self.status,
            "plan_happenings": self.plan_happenings,
            "states_expanded": self.search.states_expanded,
            "states_generated": self.search.states_generated,
            "lp_runs": self.lp_runs,
            "lp_solves": self.lp_solves,
            "lp_time_ms": round(self.lp_time * 1000.0, 3),
            "stn_checks": self.stn_checks,
            "total_time_ms": round(self.total_time * 1000.0, 3),
            "lp_goal_checks": self.search.lp_goal_checks,
            "gated_goal_candidates": self.search.gated_goal_candidates,
            "fact_goal_states": self.search.fact_goal_states,
            "makespan": self.makespan,
        }

    def plan_text(self) -> str:
        return "".join(str(step) + "\n" for step in self.plan)


class Planner:
    def __init__(self, problem: GroundedProblem, config: Optional[SearchConfig] = None):
        self.problem = problem
        self.config = config or SearchConfig()
        self.runner = LpRunner(make_solver(self.config.solver))
        self.successors = SuccessorGenerator(problem, self.config, self.runner)
        self.heuristic = make_heuristic(self.config.heuristic, problem, self.config)
        self.stats = SearchStats()
        self.goal = problem.goal
        self.goal_fluents = problem.goal_fluents
        self._ids = itertools.count()
        self.analysis = FluentAnalysis(problem) if self.config.dominance else None

    # goal test --------------------------------------------------------------
    def _affected(self, snap) -> set:
        out = set(snap.eff.written)
        if snap.endpoint in (START, END):
            out.update(ce.fluent for ce in self.problem.durative_actions[snap.owner].continuous)
        return out

    def _literal_goal_holds(self, state: TemporalState) -> bool:
        goal = self.goal
        if goal.unsatisfiable or not goal.facts_hold(state.facts):
            return False
        for c in goal.numeric:
            if c.fluents & state.theta:
                continue
            if not c.holds(state.values):
                return False
        return True

    def is_goal(self, parent: Optional[TemporalState], snap, state: TemporalState) -> bool:
        """Goal test run when ``state`` is generated; may solve an LP."""
        theta_goal = state.theta & self.goal_fluents
        if self.config.strategy == "lazy" and snap is not None:
            if theta_goal & self._affected(snap):
                state.lpgc = True
        if state.running:
            return False
        if not self.goal.unsatisfiable and self.goal.facts_hold(state.facts):
            self.stats.fact_goal_states += 1
        if not self._literal_goal_holds(state):
            return False
        if not theta_goal:
            return True
        if self.config.strategy == "lazy":
            if not state.lpgc:
                return False
            state.lpgc = False
            self.stats.gated_goal_candidates += 1
        return self.lp_goal_check(state)

    def lp_goal_check(self, state: TemporalState) -> bool:
        self.stats.lp_goal_checks += 1
        self.runner.stats.lp_runs += 1
        try:
            enc = self.successors.encode(state)
            enc.add_goal_rows(self.goal)
            prepared = self.runner.prepare(enc)
        except (NonlinearUnderSchedule, NonlinearExpression, NumericalFailure):
            return False
        return prepared.status is not Status.INFEASIBLE

    # scheduling -------------------------------------------------------------
    def schedule(self, state: TemporalState) -> Optional[PlanResult]:
        if state.n == 0:
            # nothing to time: the goal already holds in the initial state
            metric_value = None
            if self.problem.metric is not None:
                try:
                    metric_value = evaluate_tree(self.problem.metric.expr,
                                                 {**state.values, TOTAL_TIME: 0.0})
                except (UnboundFluent, ZeroDivisionError):
                    metric_value = None
            return PlanResult(SOLVED, metric_value=metric_value, final_state=state)
        self.runner.stats.lp_runs += 1
        try:
            enc = self.successors.encode(state)
            enc.add_goal_rows(self.goal)
            prepared = self.runner.prepare(enc)
        except (NonlinearUnderSchedule, NonlinearExpression, NumericalFailure):
            return None
        if prepared.status is Status.INFEASIBLE:
            return None
        sol = None
        metric_value = None
        try:
            if self.problem.metric is not None:
                try:
                    expr = enc.final_form(self.problem.metric.expr)
                except (NonlinearExpression, UnboundFluent):
                    expr = None
                if expr is not None:
                    direction = "max" if self.problem.metric.direction.startswith("max") else "min"
                    sol = self.runner.optimize(prepared, direction, expr)
                    if sol.status is not Status.OPTIMAL:
                        sol = None
                    else:
                        metric_value = sol.objective_value
            if sol is None:
                sol = self.runner.optimize(prepared, "min", enc.time(enc.n))
        except NumericalFailure:
            return None
        if sol.status is not Status.OPTIMAL:
            return None
        times = [0.0] + [sol.values[enc.time_var[j]] for j in range(1, enc.n + 1)]
        end_of = {h.start_index: h.index for h in state.history if h.snap.endpoint == END}
        steps = []
        happenings = []
        for h in state.history:
            t = times[h.index]
            happenings.append((t, h.snap))
            if h.snap.endpoint == INSTANT:
                steps.append(PlanStep(t, self.problem.instant_actions[h.snap.owner].label))
            elif h.snap.endpoint == START:
                action = self.problem.durative_actions[h.snap.owner]
                steps.append(PlanStep(t, action.label, times[end_of[h.index]] - t))
        makespan = times[-1] if enc.n else 0.0
        return PlanResult(SOLVED, steps, happenings, makespan, metric_value,
                          final_state=state)

    # search -----------------------------------------------------------------
    def _priority(self, h: float, g: int) -> tuple:
        if self.config.weight is None:
            return (h, g)
        return (g + self.config.weight * h, g)

    def solve(self) -> PlanResult:
        cfg = self.config
        started = time.perf_counter()
        deadline = started + cfg.timeout if cfg.timeout else math.inf
        root = initial_state(self.problem)
        result = self._search(root, deadline)
        result.search = self.stats
        result.lp_runs = self.runner.stats.lp_runs
        result.lp_solves = self.runner.stats.lp_solves
        result.lp_time = self.runner.stats.lp_time
        result.stn_checks = self.successors.stn_checks
        result.total_time = time.perf_counter() - started
        return result

    def _finish(self, state: TemporalState) -> Optional[PlanResult]:
        res = self.schedule(state)
        if res is None:
            self.stats.schedule_failures += 1
        return res

    def _evaluate(self, state: TemporalState) -> tuple[float, frozenset]:
        h = self.heuristic(state)
        return h, getattr(self.heuristic, "preferred", frozenset())

    def _search(self, root: TemporalState, deadline: float) -> PlanResult:
        """Greedy best-first search.

        With ``config.preferred`` a second open list receives successors
        reached by helpful snaps; the two lists are served alternately and the
        preferred one gets ``PREFERRED_BOOST`` extra turns whenever the best
        heuristic value improves.
        """
        cfg = self.config
        stats = self.stats
        root.id = next(self._ids)
        if self.is_goal(None, None, root):
            res = self._finish(root)
            if res is not None:
                return res
        h0, helpful0 = self._evaluate(root)
        if math.isinf(h0):
            return PlanResult(UNSOLVABLE)
        counter = itertools.count()
        regular = [(self._priority(h0, 0), next(counter), root, helpful0)]
        preferred: list = []
        closed = ClosedList(self.analysis)
        closed.add_if_new(root)
        expanded: set = set()
        best_h = h0
        boost = 0
        turn = 0
        while regular or preferred:
            if time.perf_counter() > deadline:
                return PlanResult(TIMEOUT)
            use_preferred = bool(preferred) and (boost > 0 or turn % 2 == 1 or not regular)
            turn += 1
            if use_preferred:
                boost = max(0, boost - 1)
                _, _, state, helpful = heapq.heappop(preferred)
            else:
                _, _, state, helpful = heapq.heappop(regular)
            if state.id in expanded:
                continue
            expanded.add(state.id)
            stats.states_expanded += 1
            if cfg.max_happenings is not None and state.n >= cfg.max_happenings:
                continue
            for snap in self.successors.applicable(state):
                if time.perf_counter() > deadline:
                    return PlanResult(TIMEOUT)
                child = self.successors.apply(state, snap)
                if isinstance(child, Pruned):
                    stats.pruned[child.reason] = stats.pruned.get(child.reason, 0) + 1
                    continue
                stats.states_generated += 1
                child.id = next(self._ids)
                if self.is_goal(state, snap, child):
                    res = self._finish(child)
                    if res is not None:
                        return res
                if not closed.add_if_new(child):
                    stats.duplicates += 1
                    continue
                h, child_helpful = self._evaluate(child)
                if math.isinf(h):
                    stats.pruned["dead-end"] = stats.pruned.get("dead-end", 0) + 1
                    continue
                entry = (self._priority(h, child.n), next(counter), child, child_helpful)
                heapq.heappush(regular, entry)
                if cfg.preferred and snap.key in helpful:
                    heapq.heappush(preferred, entry)
                if h < best_h:
                    best_h = h
                    if cfg.preferred:
                        boost += PREFERRED_BOOST
                if cfg.dump_stn:
                    _dump_stn(cfg.dump_stn, child)
        return PlanResult(UNSOLVABLE)


def _dump_stn(directory: str, state: TemporalState):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"stn-{state.id:06d}.dot")
    with open(path, "w") as fh:
        fh.write(state.stn.to_dot())


def plan(problem: GroundedProblem, config: Optional[SearchConfig] = None) -> PlanResult:
    return Planner(problem, config).solve()
