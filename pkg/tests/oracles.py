"""Reference implementations used only by the tests.

Each one is deliberately naive and shares no code path with the routine it
checks: all-pairs shortest paths by Floyd-Warshall, LPs by enumerating
vertices, and plan trajectories by dense time sampling.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

INF = math.inf


def floyd_warshall(n: int, constraints) -> list[list[float]] | None:
    """Shortest-path matrix of an STN given as (i, j, lb, ub) difference
    constraints ``lb <= t_j - t_i <= ub`` plus ``t_k >= t_0``.  None if a
    negative cycle exists."""
    d = [[0.0 if i == j else INF for j in range(n)] for i in range(n)]
    for k in range(1, n):
        d[k][0] = min(d[k][0], 0.0)
    for i, j, lb, ub in constraints:
        if ub < INF:
            d[i][j] = min(d[i][j], ub)
        if lb > -INF:
            d[j][i] = min(d[j][i], -lb)
    for k in range(n):
        for i in range(n):
            if d[i][k] == INF:
                continue
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    if any(d[i][i] < -1e-9 for i in range(n)):
        return None
    return d


def enumerate_vertices(c, rows, box, direction="min", tol=1e-9):
    """Optimum of ``direction c.x`` s.t. rows ``(a, cmp, b)`` and a finite box.

    Returns ``None`` if infeasible, else the optimal objective value.  Every
    vertex of a bounded polytope is the unique solution of some choice of
    ``dim`` tight constraints, so trying all of them finds the optimum.
    """
    dim = len(c)
    halfspaces = []  # a.x <= b
    for a, cmp, b in rows:
        a = list(map(float, a))
        if cmp in ("<=", "="):
            halfspaces.append((a, b))
        if cmp in (">=", "="):
            halfspaces.append(([-x for x in a], -b))
    for k, (lo, hi) in enumerate(box):
        e = [0.0] * dim
        e[k] = 1.0
        halfspaces.append((e, hi))
        halfspaces.append(([-x for x in e], -lo))
    best = None
    for combo in itertools.combinations(range(len(halfspaces)), dim):
        A = np.array([halfspaces[i][0] for i in combo])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, np.array([halfspaces[i][1] for i in combo]))
        if all(np.dot(a, x) <= b + 1e-7 for a, b in halfspaces):
            val = float(np.dot(c, x))
            if best is None or (val < best if direction == "min" else val > best):
                best = val
    return best


def sample_invariant_violations(problem, steps, points: int = 1000, tol: float = 1e-6):
    """Times at which a running action's numeric invariant fails.

    The plan is replayed with its own bookkeeping: discrete effects are
    applied per happening and every segment between happenings is sampled at
    ``points`` evenly spaced instants (endpoints as one-sided limits).
    """
    from lazytp.expr import DURATION, evaluate_tree
    from lazytp.model import InstantAction

    events = []
    for k, s in enumerate(steps):
        action = problem.find_action(s.label)
        if isinstance(action, InstantAction):
            events.append((s.time, 1, k, "instant", action, None))
        else:
            events.append((s.time, 1, k, "start", action, s.duration))
            events.append((s.time + s.duration, 0, k, "end", action, s.duration))
    events.sort(key=lambda e: (e[0], e[1], e[2]))
    values = dict(problem.init_values)
    running = {}
    violations = []
    now = 0.0
    for t, _, k, kind, action, dur in events:
        seg = t - now
        rates = {}
        for act in running.values():
            for ce in act.continuous:
                rates[ce.fluent] = rates.get(ce.fluent, 0.0) + evaluate_tree(ce.rate, values)
        for p in range(points + 1):
            x = seg * p / points
            sample = dict(values)
            for v, r in rates.items():
                sample[v] = sample[v] + r * x
            for act in running.values():
                for cond in act.inv_cond.numeric:
                    if not _holds(evaluate_tree(cond.expr, sample), cond.cmp, tol):
                        violations.append(now + x)
        for v, r in rates.items():
            values[v] += r * seg
        now = t
        if kind == "instant":
            effects = action.snap.eff
        elif kind == "start":
            effects = action.start_eff
            running[k] = action
        else:
            effects = action.end_eff
            running.pop(k, None)
        scope = dict(values)
        scope[DURATION] = dur if dur is not None else 0.0
        new = {}
        for e in effects.numeric:
            rhs = evaluate_tree(e.rvalue, scope)
            old = values.get(e.fluent)
            new[e.fluent] = {":=": rhs, "+=": old + rhs if old is not None else None,
                             "-=": old - rhs if old is not None else None,
                             "*=": old * rhs if old is not None else None,
                             "/=": old / rhs if old is not None and rhs else None}[e.op]
        values.update(new)
    return violations


def _holds(value: float, cmp: str, tol: float) -> bool:
    if cmp == ">=":
        return value >= -tol
    if cmp == ">":
        return value > -tol
    if cmp == "<=":
        return value <= tol
    if cmp == "<":
        return value < tol
    return abs(value) <= tol
