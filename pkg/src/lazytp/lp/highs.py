"""LP backend delegating to SciPy's HiGHS interface (optional cross-check)."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..expr import LinearExpression
from .model import LinearProgramModel, LpSolver, PreparedLp, Solution, Status


class _HighsPrepared(PreparedLp):
    def __init__(self, model: LinearProgramModel):
        self.model = model
        n = model.num_variables
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for row in model.rows:
            coef = np.zeros(n)
            for k, c in row.expr.terms.items():
                coef[k] = c
            if row.cmp == "<=":
                ub_rows.append(coef)
                ub_rhs.append(row.rhs)
            elif row.cmp == ">=":
                ub_rows.append(-coef)
                ub_rhs.append(-row.rhs)
            else:
                eq_rows.append(coef)
                eq_rhs.append(row.rhs)
        self.args = dict(
            A_ub=np.array(ub_rows) if ub_rows else None, b_ub=np.array(ub_rhs) if ub_rows else None,
            A_eq=np.array(eq_rows) if eq_rows else None, b_eq=np.array(eq_rhs) if eq_rows else None,
            bounds=[(None if v.lower == -np.inf else v.lower, None if v.upper == np.inf else v.upper)
                    for v in model.variables],
            method="highs")
        first = self._run("min", LinearExpression())
        self.status = first.status

    def _run(self, direction: str, expr: LinearExpression) -> Solution:
        n = self.model.num_variables
        c = np.zeros(n)
        sign = -1.0 if direction == "max" else 1.0
        for k, coef in expr.terms.items():
            c[k] = sign * coef
        if n == 0:
            bad = any((r.cmp == "<=" and r.rhs < -1e-9) or (r.cmp == ">=" and r.rhs > 1e-9)
                      or (r.cmp == "=" and abs(r.rhs) > 1e-9) for r in self.model.rows)
            return Solution(Status.INFEASIBLE if bad else Status.OPTIMAL, [], expr.constant)
        res = linprog(c, **self.args)
        if res.status == 2:
            return Solution(Status.INFEASIBLE)
        if res.status == 3:
            return Solution(Status.UNBOUNDED, [], -sign * np.inf)
        if res.status != 0:
            from ..errors import NumericalFailure
            raise NumericalFailure(res.message)
        values = [float(x) for x in res.x]
        return Solution(Status.OPTIMAL, values, expr.evaluate(dict(enumerate(values))))

    def optimize(self, direction: str, expr: LinearExpression) -> Solution:
        if self.status is Status.INFEASIBLE:
            return Solution(Status.INFEASIBLE)
        return self._run(direction, expr)


class HighsSolver(LpSolver):
    name = "highs"

    def prepare(self, model: LinearProgramModel) -> PreparedLp:
        return _HighsPrepared(model)
