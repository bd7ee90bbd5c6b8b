"""Simple Temporal Network with incremental all-pairs shortest paths.

Node 0 is the time origin.  ``dist[i, j]`` is the tightest known upper bound
on ``t_j - t_i``; ``math.inf`` (numpy's ``inf``) marks "no bound".
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import PoisonedStn

INF = math.inf
CONSISTENCY_TOLERANCE = 1e-9


class Verdict(Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"

    def __bool__(self) -> bool:
        return self is Verdict.CONSISTENT


Consistent = Verdict.CONSISTENT
Inconsistent = Verdict.INCONSISTENT


class Stn:
    __slots__ = ("dist", "edges", "poisoned")

    def __init__(self):
        self.dist = np.zeros((1, 1))
        self.edges: list[tuple[int, int, float, float]] = []
        self.poisoned = False

    @property
    def node_count(self) -> int:
        return self.dist.shape[0]

    def clone(self) -> "Stn":
        other = Stn.__new__(Stn)
        other.dist = self.dist.copy()
        other.edges = list(self.edges)
        other.poisoned = self.poisoned
        return other

    def _live(self):
        if self.poisoned:
            raise PoisonedStn("STN is inconsistent")

    def add_happening(self) -> int:
        """Append a node constrained only by ``t_new >= t_origin``."""
        self._live()
        n = self.node_count
        grown = np.full((n + 1, n + 1), INF)
        grown[:n, :n] = self.dist
        # the only edge leaving the new node is new -> origin with weight 0
        grown[n, :n] = self.dist[0, :]
        grown[n, n] = 0.0
        self.dist = grown
        return n

    def _add_edge(self, i: int, j: int, w: float) -> bool:
        """Add ``t_j - t_i <= w``; return False on a negative cycle."""
        d = self.dist
        if d[i, j] <= w:
            return True
        if w + d[j, i] < -CONSISTENCY_TOLERANCE:
            return False
        via = d[:, i][:, None] + w + d[j, :][None, :]
        np.minimum(d, via, out=d)
        return True

    def add_constraint(self, i: int, j: int, lb: float = -INF, ub: float = INF) -> Verdict:
        """Impose ``lb <= t_j - t_i <= ub``."""
        self._live()
        n = self.node_count
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"node out of range: {i}, {j} (have {n})")
        self.edges.append((i, j, lb, ub))
        ok = True
        if ub < INF:
            ok = self._add_edge(i, j, ub)
        if ok and lb > -INF:
            ok = self._add_edge(j, i, -lb)
        if not ok:
            self.poisoned = True
            return Inconsistent
        return Consistent

    def tighten(self, i: int, j: int, lb: float = -INF, ub: float = INF) -> Verdict:
        """Write back externally derived bounds on ``t_j - t_i``.

        Bounds already implied by the network leave it untouched.
        """
        self._live()
        cur_lb, cur_ub = self.bounds(i, j)
        new_lb = lb if lb > cur_lb else -INF
        new_ub = ub if ub < cur_ub else INF
        if new_lb == -INF and new_ub == INF:
            return Consistent
        return self.add_constraint(i, j, new_lb, new_ub)

    def bounds(self, i: int, j: int) -> tuple[float, float]:
        """Implied ``[lb, ub]`` of ``t_j - t_i``."""
        self._live()
        return float(-self.dist[j, i]), float(self.dist[i, j])

    def is_consistent(self) -> bool:
        return not self.poisoned

    def to_dot(self, names: list[str] | None = None) -> str:
        """Distance graph in Graphviz DOT form (finite entries only)."""
        n = self.node_count
        names = names or (["origin"] + [f"t{i}" for i in range(1, n)])
        lines = ["digraph stn {"]
        for i in range(n):
            lines.append(f'  n{i} [label="{names[i]}"];')
        for i in range(n):
            for j in range(n):
                if i != j and math.isfinite(self.dist[i, j]):
                    lines.append(f'  n{i} -> n{j} [label="{self.dist[i, j]:.6g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def add_happening(stn: Stn) -> int:
    return stn.add_happening()


def add_constraint(stn: Stn, i: int, j: int, lb: float = -INF, ub: float = INF) -> Verdict:
    return stn.add_constraint(i, j, lb, ub)


def bounds(stn: Stn, i: int, j: int) -> tuple[float, float]:
    return stn.bounds(i, j)


def tighten(stn: Stn, i: int, j: int, lb: float = -INF, ub: float = INF) -> Verdict:
    return stn.tighten(i, j, lb, ub)
