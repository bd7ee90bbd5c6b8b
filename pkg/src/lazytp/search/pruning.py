"""Static fluent analysis used to merge states during duplicate detection.

Two kinds of fluent get special treatment in the closed list:

* *irrelevant* fluents are never read by a condition, the goal, the metric,
  a duration or an effect on a relevant fluent, so their value cannot change
  which plans are possible and they are left out of the signature;
* *monotone* fluents appear only in conditions where a larger (or only where
  a smaller) value is never worse, and every update shifts them by an amount
  that does not depend on their own value.  A state that agrees with another
  on everything else and is at least as good on each monotone fluent admits
  every continuation the other one does, so the other one is pruned.
"""

from __future__ import annotations

from ..errors import NonlinearExpression
from ..expr import linearize, refs
from ..model import GroundedProblem

ROUNDING = 1e-6
TOLERANCE = 1e-9


def _int_refs(expr) -> set:
    return {k for k in refs(expr) if isinstance(k, int)}


class FluentAnalysis:
    def __init__(self, problem: GroundedProblem):
        written: set = set()
        # fluent -> fluents whose new value depends on it
        feeds: dict[int, set] = {}
        self_read: set = set()
        scaled: set = set()
        conditions = list(problem.goal.numeric)
        direct: set = set(problem.goal.fluents)
        if problem.metric is not None:
            direct |= _int_refs(problem.metric.expr)
        effect_lists = [a.eff.numeric for a in problem.instant_actions]
        for a in problem.instant_actions:
            conditions.extend(a.pre.numeric)
        for a in problem.durative_actions:
            for cond in (a.start_cond, a.end_cond, a.inv_cond):
                conditions.extend(cond.numeric)
            direct |= a.duration_fluents
            effect_lists += [a.start_eff.numeric, a.end_eff.numeric]
            for ce in a.continuous:
                written.add(ce.fluent)
                for k in _int_refs(ce.rate):
                    feeds.setdefault(k, set()).add(ce.fluent)
                    if k == ce.fluent:
                        self_read.add(k)
        for effects in effect_lists:
            for e in effects:
                written.add(e.fluent)
                if e.op in ("*=", "/="):
                    scaled.add(e.fluent)
                for k in _int_refs(e.rvalue):
                    feeds.setdefault(k, set()).add(e.fluent)
                    if k == e.fluent:
                        self_read.add(k)
        for c in conditions:
            direct |= c.fluents

        relevant = set(direct)
        frontier = list(relevant)
        readers_of: dict[int, set] = {}
        for src, dsts in feeds.items():
            for dst in dsts:
                readers_of.setdefault(dst, set()).add(src)
        while frontier:
            f = frontier.pop()
            for src in readers_of.get(f, ()):
                if src not in relevant:
                    relevant.add(src)
                    frontier.append(src)
        all_fluents = set(range(len(problem.fluents))) | set(problem.init_values)
        self.irrelevant = frozenset(all_fluents - relevant)

        static = {k: v for k, v in problem.init_values.items() if k not in written}
        sign: dict[int, int] = {}
        blocked: set = set(self_read) | scaled
        if problem.metric is not None:
            blocked |= _int_refs(problem.metric.expr)
        for a in problem.durative_actions:
            blocked |= a.duration_fluents
        for src, dsts in feeds.items():
            if any(d != src and d in relevant for d in dsts):
                blocked.add(src)
        for c in conditions:
            try:
                lin = linearize(c.expr, static)
            except NonlinearExpression:
                blocked |= c.fluents
                continue
            for k, coef in lin.terms.items():
                if not isinstance(k, int):
                    continue
                if c.cmp in (">=", ">"):
                    s = 1 if coef > 0 else -1
                elif c.cmp in ("<=", "<"):
                    s = -1 if coef > 0 else 1
                else:
                    blocked.add(k)
                    continue
                if sign.setdefault(k, s) != s:
                    blocked.add(k)
        # written fluents only: a static one is identical in every state anyway
        self.monotone = {k: s for k, s in sign.items()
                         if k not in blocked and k in relevant and k in written}

    def signature(self, state) -> tuple[tuple, tuple]:
        """``(exact part, dominance vector)``; the vector is oriented so bigger is better."""
        literal = state.tracker.literal
        exact = []
        vector = []
        for k in sorted(literal):
            if k in self.irrelevant:
                continue
            v = literal[k]
            s = self.monotone.get(k)
            if s is None:
                exact.append((k, round(v / ROUNDING)))
            else:
                vector.append((k, s * v))
        mono_keys = tuple(k for k, _ in vector)
        return state.key(tuple(exact)) + (mono_keys,), tuple(v for _, v in vector)


class ClosedList:
    """Signatures seen so far; with ``analysis`` dominated states also count as seen."""

    def __init__(self, analysis: FluentAnalysis | None):
        self.analysis = analysis
        self.table: dict = {}

    def add_if_new(self, state) -> bool:
        if self.analysis is None:
            key = state.key()
            if key in self.table:
                return False
            self.table[key] = None
            return True
        exact, vector = self.analysis.signature(state)
        seen = self.table.setdefault(exact, [])
        for other in seen:
            if all(o >= v - TOLERANCE for o, v in zip(other, vector)):
                return False
        # drop entries the newcomer dominates so the lists stay short
        seen[:] = [o for o in seen if not all(v >= x - TOLERANCE for v, x in zip(vector, o))]
        seen.append(vector)
        return True
