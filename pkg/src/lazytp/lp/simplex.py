"""Dense two-phase tableau simplex.

Pricing uses the most negative reduced cost and falls back to Bland's
smallest-index rule after a run of degenerate pivots, which rules out
cycling.  Phase 1 is run once per model; the resulting basis is reused for
every objective passed to :meth:`DenseTableau.optimize`.

Before the tableau is built, free variables pinned down by an equality row
are substituted out.  Encodings that carry one free value column per fluent
and happening shrink to roughly their time columns this way.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericalFailure
from ..expr import LinearExpression
from .model import (LP_TOLERANCE, LinearProgramModel, LpSolver, PreparedLp, Solution, Status)

PIVOT_TOLERANCE = 1e-9
ITERATION_CAP = 10**6
DEGENERATE_RUN = 50


class _Form:
    """Standard-form image ``A x = b, x >= 0`` of a model."""

    def __init__(self, model: LinearProgramModel):
        self.model = model
        self.columns: list[list[tuple[int, float]]] = []  # model var -> [(col, sign)]
        self.offsets: list[float] = []
        ncols = 0
        bound_rows: list[tuple[int, float]] = []
        for var in model.variables:
            lo, hi = var.lower, var.upper
            if math.isfinite(lo):
                self.columns.append([(ncols, 1.0)])
                self.offsets.append(lo)
                if math.isfinite(hi):
                    bound_rows.append((ncols, hi - lo))
                ncols += 1
            elif math.isfinite(hi):
                self.columns.append([(ncols, -1.0)])
                self.offsets.append(hi)
                ncols += 1
            else:
                self.columns.append([(ncols, 1.0), (ncols + 1, -1.0)])
                self.offsets.append(0.0)
                ncols += 2
        self.n_struct = ncols
        self.trivially_infeasible = any(v.lower > v.upper + LP_TOLERANCE for v in model.variables)

        rows = []  # (dense coefficients over struct cols, cmp, rhs)
        for row in model.rows:
            coef = np.zeros(ncols)
            rhs = row.rhs
            for k, c in row.expr.terms.items():
                rhs -= c * self.offsets[k]
                for col, sign in self.columns[k]:
                    coef[col] += c * sign
            rows.append((coef, row.cmp, rhs))
        for col, width in bound_rows:
            coef = np.zeros(ncols)
            coef[col] = 1.0
            rows.append((coef, "<=", width))

        # normalise to rhs >= 0, then add slack / surplus / artificial columns
        norm = []
        for coef, cmp, rhs in rows:
            if rhs < 0:
                coef, rhs = -coef, -rhs
                cmp = {"<=": ">=", ">=": "<=", "=": "="}[cmp]
            norm.append((coef, cmp, rhs))
        m = len(norm)
        n_slack = sum(1 for _, cmp, _ in norm if cmp != "=")
        n_art = sum(1 for _, cmp, _ in norm if cmp != "<=")
        total = ncols + n_slack + n_art
        tab = np.zeros((m, total + 1))
        basis = []
        s_col = ncols
        a_col = ncols + n_slack
        for r, (coef, cmp, rhs) in enumerate(norm):
            tab[r, :ncols] = coef
            tab[r, -1] = rhs
            if cmp == "<=":
                tab[r, s_col] = 1.0
                basis.append(s_col)
                s_col += 1
            elif cmp == ">=":
                tab[r, s_col] = -1.0
                s_col += 1
                tab[r, a_col] = 1.0
                basis.append(a_col)
                a_col += 1
            else:
                tab[r, a_col] = 1.0
                basis.append(a_col)
                a_col += 1
        self.tableau = tab
        self.basis = basis
        self.first_artificial = ncols + n_slack
        self.total_cols = total

    def cost_vector(self, expr: LinearExpression, sign: float) -> tuple[np.ndarray, float]:
        c = np.zeros(self.total_cols)
        const = expr.constant
        for k, coef in expr.terms.items():
            const += coef * self.offsets[k]
            for col, s in self.columns[k]:
                c[col] += sign * coef * s
        return c, const

    def point(self, tab: np.ndarray, basis: list[int]) -> list[float]:
        x = np.zeros(self.total_cols)
        for r, col in enumerate(basis):
            x[col] = tab[r, -1]
        out = []
        for k, cols in enumerate(self.columns):
            out.append(float(self.offsets[k] + sum(s * x[c] for c, s in cols)))
        return out


def _run(tab: np.ndarray, basis: list[int], cost: np.ndarray, allowed: int,
         counter: list[int]) -> Status:
    """Minimise ``cost @ x`` in place over columns ``< allowed``."""
    m = tab.shape[0]
    degenerate = 0
    while True:
        if counter[0] >= ITERATION_CAP:
            raise NumericalFailure("simplex iteration cap reached")
        cb = cost[basis] if m else np.zeros(0)
        reduced = cost[:allowed] - (cb @ tab[:, :allowed] if m else 0.0)
        candidates = np.nonzero(reduced < -PIVOT_TOLERANCE)[0]
        if candidates.size == 0:
            return Status.OPTIMAL
        if degenerate >= DEGENERATE_RUN:
            enter = int(candidates[0])
        else:
            enter = int(candidates[np.argmin(reduced[candidates])])
        column = tab[:, enter]
        rows = np.nonzero(column > PIVOT_TOLERANCE)[0]
        if rows.size == 0:
            return Status.UNBOUNDED
        ratios = tab[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOLERANCE]
        leave = int(min(ties, key=lambda r: basis[r]))
        degenerate = degenerate + 1 if best <= PIVOT_TOLERANCE else 0
        _pivot(tab, leave, enter)
        basis[leave] = enter
        counter[0] += 1


def _pivot(tab: np.ndarray, r: int, c: int) -> None:
    tab[r] /= tab[r, c]
    col = tab[:, c].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])
    tab[np.abs(tab) < 1e-13] = 0.0


class DenseTableau(PreparedLp):
    def __init__(self, form: _Form, tab: np.ndarray, basis: list[int], status: Status, pivots: int):
        self.form = form
        self.tab = tab
        self.basis = basis
        self.status = status
        self.pivots = pivots

    def optimize(self, direction: str, expr: LinearExpression) -> Solution:
        if self.status is Status.INFEASIBLE:
            return Solution(Status.INFEASIBLE)
        sign = -1.0 if direction == "max" else 1.0
        cost, const = self.form.cost_vector(expr, sign)
        tab = self.tab.copy()
        basis = list(self.basis)
        counter = [0]
        status = _run(tab, basis, cost, self.form.first_artificial, counter)
        if status is Status.UNBOUNDED:
            return Solution(Status.UNBOUNDED, [], sign * -math.inf, counter[0])
        values = self.form.point(tab, basis)
        obj = float(expr.evaluate(dict(enumerate(values))))
        viol = self.form.model.violation(values)
        if viol > 10 * LP_TOLERANCE:
            raise NumericalFailure(f"simplex returned a point violating rows by {viol:.3g}")
        return Solution(Status.OPTIMAL, values, obj, self.pivots + counter[0])


class _Substitution:
    """Eliminates free variables through equality rows they appear in."""

    def __init__(self, model: LinearProgramModel):
        self.model = model
        rows = [[dict(r.expr.terms), r.cmp, r.rhs] for r in model.rows]
        uses: dict[int, set[int]] = {}
        for r, (terms, _, _) in enumerate(rows):
            for k in terms:
                uses.setdefault(k, set()).add(r)
        free = {k for k, v in enumerate(model.variables)
                if math.isinf(v.lower) and math.isinf(v.upper)}
        alive = [True] * len(rows)
        order: list[tuple[int, dict, float]] = []
        for r, row in enumerate(rows):
            terms, cmp, rhs = row
            if cmp != "=" or not alive[r]:
                continue
            big = max((abs(c) for c in terms.values()), default=0.0)
            pick = [k for k, c in terms.items() if k in free and abs(c) >= 0.1 * big > 0]
            if not pick:
                continue
            k = min(pick, key=lambda j: (len(uses[j]), j))
            ck = terms[k]
            expr = {j: -c / ck for j, c in terms.items() if j != k}
            const = rhs / ck
            alive[r] = False
            for j in terms:
                uses[j].discard(r)
            for s in list(uses[k]):
                other = rows[s][0]
                a = other.pop(k)
                for j, c in expr.items():
                    v = other.get(j, 0.0) + a * c
                    if abs(v) < 1e-12:
                        other.pop(j, None)
                        uses[j].discard(s)
                    else:
                        other[j] = v
                        uses.setdefault(j, set()).add(s)
                rows[s][2] -= a * const
            uses[k] = set()
            free.discard(k)
            order.append((k, expr, const))

        # express every eliminated variable over the survivors only
        self.resolved: dict[int, tuple[dict, float]] = {}
        for k, expr, const in reversed(order):
            terms, total = {}, const
            for j, c in expr.items():
                if j in self.resolved:
                    sub, sc = self.resolved[j]
                    total += c * sc
                    for i, v in sub.items():
                        terms[i] = terms.get(i, 0.0) + c * v
                else:
                    terms[j] = terms.get(j, 0.0) + c
            self.resolved[k] = (terms, total)

        self.survivors = [k for k in range(model.num_variables) if k not in self.resolved]
        index = {k: i for i, k in enumerate(self.survivors)}
        self.index = index
        reduced = LinearProgramModel()
        for k in self.survivors:
            v = model.variables[k]
            reduced.add_variable(v.name, v.lower, v.upper)
        self.contradiction = False
        for r, (terms, cmp, rhs) in enumerate(rows):
            if not alive[r]:
                continue
            if not terms:
                bad = {"<=": 0.0 > rhs + LP_TOLERANCE, ">=": 0.0 < rhs - LP_TOLERANCE,
                       "=": abs(rhs) > LP_TOLERANCE}[cmp]
                self.contradiction = self.contradiction or bad
                continue
            reduced.add_row(LinearExpression({index[j]: c for j, c in terms.items()}), cmp, rhs)
        self.reduced = reduced

    def objective(self, expr: LinearExpression) -> LinearExpression:
        terms, const = {}, expr.constant
        for k, c in expr.terms.items():
            if k in self.resolved:
                sub, sc = self.resolved[k]
                const += c * sc
                for j, v in sub.items():
                    terms[self.index[j]] = terms.get(self.index[j], 0.0) + c * v
            else:
                terms[self.index[k]] = terms.get(self.index[k], 0.0) + c
        return LinearExpression(terms, const)

    def expand(self, values: list) -> list:
        full = [0.0] * self.model.num_variables
        for i, k in enumerate(self.survivors):
            full[k] = values[i]
        for k, (sub, const) in self.resolved.items():
            full[k] = const + sum(c * values[self.index[j]] for j, c in sub.items())
        return full


class ReducedTableau(PreparedLp):
    def __init__(self, substitution: _Substitution, inner: PreparedLp):
        self.substitution = substitution
        self.inner = inner
        self.status = inner.status

    def optimize(self, direction: str, expr: LinearExpression) -> Solution:
        sol = self.inner.optimize(direction, self.substitution.objective(expr))
        if sol.status is not Status.OPTIMAL:
            return sol
        values = self.substitution.expand(sol.values)
        viol = self.substitution.model.violation(values)
        if viol > 10 * LP_TOLERANCE:
            raise NumericalFailure(f"substituted point violates rows by {viol:.3g}")
        obj = float(expr.evaluate(dict(enumerate(values))))
        return Solution(Status.OPTIMAL, values, obj, sol.pivots)


class SimplexSolver(LpSolver):
    """Bundled deterministic dense simplex."""

    name = "simplex"

    def __init__(self, substitute: bool = True):
        self.substitute = substitute

    def prepare(self, model: LinearProgramModel) -> PreparedLp:
        if not self.substitute:
            return self._tableau(model)
        sub = _Substitution(model)
        if sub.contradiction:
            form = _Form(LinearProgramModel())
            return DenseTableau(form, form.tableau, form.basis, Status.INFEASIBLE, 0)
        return ReducedTableau(sub, self._tableau(sub.reduced))

    def _tableau(self, model: LinearProgramModel) -> DenseTableau:
        form = _Form(model)
        if form.trivially_infeasible:
            return DenseTableau(form, form.tableau, form.basis, Status.INFEASIBLE, 0)
        tab, basis = form.tableau, list(form.basis)
        counter = [0]
        first_art = form.first_artificial
        if first_art < form.total_cols:
            cost = np.zeros(form.total_cols)
            cost[first_art:] = 1.0
            _run(tab, basis, cost, form.total_cols, counter)
            infeas = float(sum(tab[r, -1] for r, col in enumerate(basis) if col >= first_art))
            if infeas > LP_TOLERANCE:
                return DenseTableau(form, tab, basis, Status.INFEASIBLE, counter[0])
            tab, basis = _evict_artificials(tab, basis, first_art)
        return DenseTableau(form, tab, basis, Status.OPTIMAL, counter[0])


def _evict_artificials(tab: np.ndarray, basis: list[int], first_art: int):
    keep = []
    for r in range(tab.shape[0]):
        if basis[r] < first_art:
            keep.append(r)
            continue
        row = tab[r, :first_art]
        nz = np.nonzero(np.abs(row) > PIVOT_TOLERANCE)[0]
        if nz.size:
            c = int(nz[np.argmax(np.abs(row[nz]))])
            _pivot(tab, r, c)
            basis[r] = c
            keep.append(r)
        # else: redundant row, dropped
    tab = tab[keep]
    np.maximum(tab[:, -1], 0.0, out=tab[:, -1])
    basis = [basis[r] for r in keep]
    # artificial columns are never re-entered; zero them out of the way
    tab[:, first_art:-1] = 0.0
    return tab, basis


def solve(model: LinearProgramModel) -> Solution:
    return SimplexSolver().solve(model)
