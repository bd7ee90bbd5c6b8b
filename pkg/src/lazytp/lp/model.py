"""Solver-independent linear program description."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..expr import LinearExpression

INF = math.inf
LP_TOLERANCE = 1e-6


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = INF


@dataclass
class Row:
    expr: LinearExpression  # keys are variable indices; constant is ignored by solvers
    cmp: str  # "<=", "=", ">="
    rhs: float
    name: str = ""


@dataclass
class Objective:
    direction: str  # "min" | "max"
    expr: LinearExpression


@dataclass
class LinearProgramModel:
    variables: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    objective: Optional[Objective] = None

    def add_variable(self, name: str, lower: float = 0.0, upper: float = INF) -> int:
        self.variables.append(Variable(name, lower, upper))
        return len(self.variables) - 1

    def add_row(self, expr: LinearExpression, cmp: str, rhs: float = 0.0, name: str = "") -> None:
        """Add ``expr cmp rhs``; a constant inside ``expr`` is moved to the right."""
        if cmp in ("<", ">"):
            cmp += "="
        if cmp not in ("<=", "=", ">="):
            raise ValueError(f"bad row comparator {cmp}")
        for key in expr.terms:
            if not (isinstance(key, int) and 0 <= key < len(self.variables)):
                raise KeyError(f"row references undeclared variable {key!r}")
        self.rows.append(Row(expr.without_constant(), cmp, rhs - expr.constant, name))

    def set_objective(self, direction: str, expr: LinearExpression) -> None:
        if direction not in ("min", "max"):
            raise ValueError(direction)
        self.objective = Objective(direction, expr)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def copy(self) -> "LinearProgramModel":
        return LinearProgramModel(list(self.variables), list(self.rows), self.objective)

    def violation(self, values: list) -> float:
        """Largest row or bound violation at a point."""
        worst = 0.0
        for row in self.rows:
            lhs = sum(c * values[k] for k, c in row.expr.terms.items())
            if row.cmp == "<=":
                worst = max(worst, lhs - row.rhs)
            elif row.cmp == ">=":
                worst = max(worst, row.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - row.rhs))
        for var, x in zip(self.variables, values):
            worst = max(worst, var.lower - x, x - var.upper)
        return worst


@dataclass
class Solution:
    status: Status
    values: list = field(default_factory=list)
    objective_value: float = 0.0
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is not Status.INFEASIBLE


class PreparedLp(ABC):
    """A model whose feasibility is settled and which can be re-optimised."""

    status: Status

    @abstractmethod
    def optimize(self, direction: str, expr: LinearExpression) -> Solution:
        ...


class LpSolver(ABC):
    """Contract shared by every LP backend."""

    name = "abstract"

    @abstractmethod
    def prepare(self, model: LinearProgramModel) -> PreparedLp:
        ...

    def solve(self, model: LinearProgramModel) -> Solution:
        prepared = self.prepare(model)
        if prepared.status is Status.INFEASIBLE:
            return Solution(Status.INFEASIBLE)
        if model.objective is None:
            return prepared.optimize("min", LinearExpression())
        return prepared.optimize(model.objective.direction, model.objective.expr)
