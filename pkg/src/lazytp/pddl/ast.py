"""Abstract syntax for the supported PDDL subset.

Every node carries an optional source position that is ignored by equality,
so a printed-and-reparsed tree compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


def _pos():
    return field(default=None, compare=False, repr=False)


# expressions ---------------------------------------------------------------

@dataclass
class Number:
    value: float
    pos: Optional[tuple] = _pos()


@dataclass
class FluentTerm:
    name: str
    args: tuple
    pos: Optional[tuple] = _pos()


@dataclass
class DurationRef:
    pos: Optional[tuple] = _pos()


@dataclass
class TotalTimeRef:
    pos: Optional[tuple] = _pos()


@dataclass
class TimeRef:
    """The ``#t`` symbol of continuous effects."""
    pos: Optional[tuple] = _pos()


@dataclass
class BinaryExpr:
    op: str
    left: "NumExpr"
    right: "NumExpr"
    pos: Optional[tuple] = _pos()


@dataclass
class Minus:
    arg: "NumExpr"
    pos: Optional[tuple] = _pos()


NumExpr = Union[Number, FluentTerm, DurationRef, TotalTimeRef, TimeRef, BinaryExpr, Minus]


# conditions ----------------------------------------------------------------

@dataclass
class Atom:
    predicate: str
    args: tuple
    pos: Optional[tuple] = _pos()


@dataclass
class NotCond:
    arg: Atom
    pos: Optional[tuple] = _pos()


@dataclass
class Comparison:
    cmp: str
    left: NumExpr
    right: NumExpr
    pos: Optional[tuple] = _pos()


@dataclass
class AndCond:
    items: tuple
    pos: Optional[tuple] = _pos()


@dataclass
class TimedCond:
    when: str  # "start" | "end" | "all"
    cond: "Cond"
    pos: Optional[tuple] = _pos()


Cond = Union[Atom, NotCond, Comparison, AndCond, TimedCond]


# effects -------------------------------------------------------------------

@dataclass
class AddEffect:
    atom: Atom
    pos: Optional[tuple] = _pos()


@dataclass
class DelEffect:
    atom: Atom
    pos: Optional[tuple] = _pos()


@dataclass
class AssignEffect:
    op: str  # assign | increase | decrease | scale-up | scale-down
    fluent: FluentTerm
    value: NumExpr
    pos: Optional[tuple] = _pos()


@dataclass
class ContinuousEffectAst:
    op: str  # increase | decrease
    fluent: FluentTerm
    value: NumExpr  # contains #t
    pos: Optional[tuple] = _pos()


@dataclass
class AndEffect:
    items: tuple
    pos: Optional[tuple] = _pos()


@dataclass
class TimedEffect:
    when: str  # "start" | "end"
    effect: "Eff"
    pos: Optional[tuple] = _pos()


Eff = Union[AddEffect, DelEffect, AssignEffect, ContinuousEffectAst, AndEffect, TimedEffect]


# declarations --------------------------------------------------------------

@dataclass
class TypedName:
    name: str
    type: str = "object"
    pos: Optional[tuple] = _pos()


@dataclass
class Signature:
    name: str
    params: tuple  # of TypedName
    pos: Optional[tuple] = _pos()


@dataclass
class ActionSchema:
    name: str
    parameters: tuple
    precondition: Cond
    effect: Eff
    pos: Optional[tuple] = _pos()


@dataclass
class DurationConstraintAst:
    cmp: str
    value: NumExpr
    pos: Optional[tuple] = _pos()


@dataclass
class DurativeSchema:
    name: str
    parameters: tuple
    duration: tuple  # of DurationConstraintAst
    condition: Cond
    effect: Eff
    pos: Optional[tuple] = _pos()


@dataclass
class DomainAst:
    name: str
    requirements: tuple = ()
    types: tuple = ()  # of TypedName (name, parent)
    constants: tuple = ()
    predicates: tuple = ()
    functions: tuple = ()
    actions: tuple = ()
    durative_actions: tuple = ()
    pos: Optional[tuple] = _pos()


@dataclass
class FluentInit:
    fluent: FluentTerm
    value: float
    pos: Optional[tuple] = _pos()


@dataclass
class MetricAst:
    direction: str
    expr: NumExpr
    pos: Optional[tuple] = _pos()


@dataclass
class ProblemAst:
    name: str
    domain: str
    requirements: tuple = ()
    objects: tuple = ()
    init: tuple = ()  # Atom | FluentInit
    goal: Cond = field(default_factory=lambda: AndCond(()))
    metric: Optional[MetricAst] = None
    pos: Optional[tuple] = _pos()
