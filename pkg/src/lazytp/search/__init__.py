"""Forward search over temporal states."""

from .heuristic import GoalCountHeuristic, RelaxedPlanHeuristic, make_heuristic
from .planner import SOLVED, TIMEOUT, UNSOLVABLE, Planner, PlanResult, PlanStep, plan
from .state import Pruned, SearchConfig, SuccessorGenerator, TemporalState, initial_state

__all__ = ["GoalCountHeuristic", "RelaxedPlanHeuristic", "make_heuristic", "SOLVED", "TIMEOUT",
           "UNSOLVABLE", "Planner", "PlanResult", "PlanStep", "plan", "Pruned", "SearchConfig",
           "SuccessorGenerator", "TemporalState", "initial_state"]
