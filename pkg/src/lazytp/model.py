"""Grounded problem representation and discrete-state evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional

from .errors import PlannerError, UnboundFluent
from .expr import (DURATION, Const, Expr, LinearExpression, evaluate_tree, interval_eval,
                   linearize, refs)

COMPARATORS = ("<", "<=", "=", ">=", ">")
ASSIGN_OPS = (":=", "+=", "-=", "*=", "/=")

NUMERIC_TOLERANCE = 1e-6

START, END, INSTANT = "start", "end", "instant"


class ConflictingEffects(PlannerError):
    """Two effects of one happening write the same fluent."""


def compare(value: float, cmp: str, k: float = 0.0, tol: float = NUMERIC_TOLERANCE) -> bool:
    """``value cmp k`` with strict comparisons relaxed to the tolerance."""
    if cmp in (">=", ">"):
        return value >= k - tol
    if cmp in ("<=", "<"):
        return value <= k + tol
    if cmp == "=":
        return abs(value - k) <= tol
    raise ValueError(f"unknown comparator {cmp}")


def interval_satisfiable(lo: float, hi: float, cmp: str, tol: float = NUMERIC_TOLERANCE) -> bool:
    """Could some value in [lo, hi] satisfy ``value cmp 0``?"""
    if cmp in (">=", ">"):
        return hi >= -tol
    if cmp in ("<=", "<"):
        return lo <= tol
    return lo <= tol and hi >= -tol


@dataclass(frozen=True)
class NumericCondition:
    """``expr cmp 0`` where ``expr`` is the difference of the two compared sides."""

    expr: Expr
    cmp: str

    @cached_property
    def fluents(self) -> frozenset:
        return frozenset(k for k in refs(self.expr) if isinstance(k, int))

    def normal_form(self, values: Mapping | None = None) -> tuple[LinearExpression, str, float]:
        """``(e, cmp, k)`` with ``e`` free of a constant term."""
        lin = linearize(self.expr, values)
        return lin.without_constant(), self.cmp, -lin.constant

    def holds(self, values: Mapping, tol: float = NUMERIC_TOLERANCE) -> bool:
        try:
            return compare(evaluate_tree(self.expr, values), self.cmp, 0.0, tol)
        except (UnboundFluent, ZeroDivisionError):
            return False

    def satisfiable(self, bounds: Mapping, tol: float = NUMERIC_TOLERANCE) -> bool:
        try:
            lo, hi = interval_eval(self.expr, bounds)
        except UnboundFluent:
            return False
        return interval_satisfiable(lo, hi, self.cmp, tol)


@dataclass(frozen=True)
class Condition:
    pos: frozenset = frozenset()
    neg: frozenset = frozenset()
    numeric: tuple = ()
    unsatisfiable: bool = False

    @cached_property
    def fluents(self) -> frozenset:
        out: set = set()
        for c in self.numeric:
            out |= c.fluents
        return frozenset(out)

    @property
    def is_empty(self) -> bool:
        return not (self.pos or self.neg or self.numeric or self.unsatisfiable)

    def facts_hold(self, facts) -> bool:
        return not self.unsatisfiable and self.pos <= facts and not (self.neg & facts)

    def holds(self, facts, values: Mapping, tol: float = NUMERIC_TOLERANCE) -> bool:
        return self.facts_hold(facts) and all(c.holds(values, tol) for c in self.numeric)


@dataclass(frozen=True)
class NumericEffect:
    fluent: int
    op: str
    rvalue: Expr

    @cached_property
    def reads(self) -> frozenset:
        return frozenset(refs(self.rvalue))

    @property
    def uses_duration(self) -> bool:
        return DURATION in self.reads


@dataclass(frozen=True)
class Effects:
    adds: frozenset = frozenset()
    dels: frozenset = frozenset()
    numeric: tuple = ()

    @cached_property
    def written(self) -> frozenset:
        return frozenset(e.fluent for e in self.numeric)

    @property
    def is_empty(self) -> bool:
        return not (self.adds or self.dels or self.numeric)


@dataclass(frozen=True)
class ContinuousEffect:
    """``d fluent / dt = rate``; decrease effects carry a negated rate."""

    fluent: int
    rate: Expr

    @cached_property
    def reads(self) -> frozenset:
        return frozenset(k for k in refs(self.rate) if isinstance(k, int))


@dataclass(frozen=True)
class DurationConstraint:
    cmp: str  # "<=", ">=", "="
    expr: Expr


@dataclass(frozen=True)
class DurativeAction:
    index: int
    name: str
    args: tuple
    duration: tuple
    start_cond: Condition
    end_cond: Condition
    inv_cond: Condition
    start_eff: Effects
    end_eff: Effects
    continuous: tuple = ()

    @property
    def label(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"

    @cached_property
    def duration_fluents(self) -> frozenset:
        out: set = set()
        for dc in self.duration:
            out |= {k for k in refs(dc.expr) if isinstance(k, int)}
        return frozenset(out)

    def duration_bounds(self, values: Mapping) -> tuple[float, float]:
        """Evaluate the duration constraints to ``(lb, ub)``."""
        lb, ub = 0.0, float("inf")
        for dc in self.duration:
            v = evaluate_tree(dc.expr, values)
            if dc.cmp in (">=", ">", "="):
                lb = max(lb, v)
            if dc.cmp in ("<=", "<", "="):
                ub = min(ub, v)
        return lb, ub

    @cached_property
    def static_duration(self) -> Optional[tuple[float, float]]:
        if all(isinstance(dc.expr, Const) for dc in self.duration):
            return self.duration_bounds({})
        return None

    @cached_property
    def snaps(self) -> tuple["SnapAction", "SnapAction"]:
        return snap_actions(self)


@dataclass(frozen=True)
class InstantAction:
    index: int
    name: str
    args: tuple
    pre: Condition
    eff: Effects

    @property
    def label(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"

    @cached_property
    def snap(self) -> "SnapAction":
        return SnapAction(self.index, INSTANT, self.pre, self.eff, self.label)


@dataclass(frozen=True)
class SnapAction:
    owner: int
    endpoint: str
    pre: Condition
    eff: Effects
    label: str = ""

    @property
    def key(self) -> tuple:
        return (self.endpoint, self.owner)

    def __str__(self) -> str:
        mark = {START: "start", END: "end", INSTANT: ""}[self.endpoint]
        return f"{self.label}{'[' + mark + ']' if mark else ''}"


def snap_actions(action: DurativeAction) -> tuple[SnapAction, SnapAction]:
    """Start and end snap actions of a durative action."""
    return (SnapAction(action.index, START, action.start_cond, action.start_eff, action.label),
            SnapAction(action.index, END, action.end_cond, action.end_eff, action.label))


@dataclass(frozen=True)
class Metric:
    direction: str  # "minimize" | "maximize"
    expr: Expr


@dataclass
class GroundedProblem:
    name: str
    domain_name: str
    facts: list
    fluents: list
    instant_actions: list
    durative_actions: list
    init_facts: frozenset
    init_values: dict
    goal: Condition
    metric: Optional[Metric] = None
    fact_index: dict = field(default_factory=dict)
    fluent_index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.fact_index:
            self.fact_index = {f: i for i, f in enumerate(self.facts)}
        if not self.fluent_index:
            self.fluent_index = {f: i for i, f in enumerate(self.fluents)}

    def fact(self, name: str) -> int:
        return self.fact_index[name.lower()]

    def fluent(self, name: str) -> int:
        return self.fluent_index[name.lower()]

    @cached_property
    def goal_fluents(self) -> frozenset:
        return self.goal.fluents

    @cached_property
    def condition_fluents(self) -> frozenset:
        """Fluents read by any condition (including invariants) or the goal."""
        out = set(self.goal.fluents)
        for a in self.instant_actions:
            out |= a.pre.fluents
        for a in self.durative_actions:
            out |= a.start_cond.fluents | a.end_cond.fluents | a.inv_cond.fluents
        return frozenset(out)

    def find_action(self, label: str):
        """Look up a grounded action by its ``(name args...)`` label."""
        label = " ".join(label.lower().replace("(", " ").replace(")", " ").split())
        for a in self.durative_actions:
            if " ".join((a.name,) + a.args) == label:
                return a
        for a in self.instant_actions:
            if " ".join((a.name,) + a.args) == label:
                return a
        return None


def evaluate(expr: LinearExpression, valuation: Mapping) -> float:
    return expr.evaluate(valuation)


def apply_numeric(op: str, old: float | None, rhs: float) -> float:
    if op == ":=":
        return rhs
    if old is None:
        raise UnboundFluent("lvalue")
    if op == "+=":
        return old + rhs
    if op == "-=":
        return old - rhs
    if op == "*=":
        return old * rhs
    if op == "/=":
        if rhs == 0.0:
            raise ZeroDivisionError("division by zero in /= effect")
        return old / rhs
    raise ValueError(f"unknown assignment operator {op}")


def apply_discrete(valuation: Mapping, facts: frozenset, effects: Effects,
                   extra: Mapping | None = None) -> tuple[dict, frozenset]:
    """Apply a happening's discrete effects with simultaneous-read semantics.

    ``extra`` supplies values for non-fluent keys such as ``?duration``.
    """
    read = dict(valuation)
    if extra:
        read.update(extra)
    updates = {}
    for eff in effects.numeric:
        if eff.fluent in updates:
            raise ConflictingEffects(f"fluent {eff.fluent} written twice in one happening")
        rhs = evaluate_tree(eff.rvalue, read)
        updates[eff.fluent] = apply_numeric(eff.op, valuation.get(eff.fluent), rhs)
    new_values = dict(valuation)
    new_values.update(updates)
    new_facts = (facts - effects.dels) | effects.adds
    return new_values, frozenset(new_facts)
