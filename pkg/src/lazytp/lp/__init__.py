"""Linear programming: model, bundled simplex, optional HiGHS backend, LP-format dump."""

from .lpformat import to_lp_format
from .model import (LinearProgramModel, LpSolver, Objective, Row, Solution, Status, Variable)
from .simplex import SimplexSolver, solve


def make_solver(name: str = "simplex") -> LpSolver:
    if name == "simplex":
        return SimplexSolver()
    if name == "highs":
        from .highs import HighsSolver
        return HighsSolver()
    raise ValueError(f"unknown LP solver '{name}'")


__all__ = ["LinearProgramModel", "LpSolver", "Objective", "Row", "Solution", "Status", "Variable",
           "SimplexSolver", "solve", "make_solver", "to_lp_format"]
