"""Numeric expressions: symbolic trees, linear normal form and interval evaluation.

Expression leaves are keyed by arbitrary hashable objects.  After grounding,
fluents are integer ids; ``DURATION`` and ``TOTAL_TIME`` are reserved keys for
``?duration`` and ``total-time``.  LP encodings reuse :class:`LinearExpression`
with LP variable indices as keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Union

from .errors import NonlinearExpression, UnboundFluent

DURATION = "?duration"
TOTAL_TIME = "total-time"

INF = math.inf


class LinearExpression:
    """Sparse linear form ``sum(coef * key) + constant`` with zero terms dropped."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Mapping[Hashable, float] | None = None, constant: float = 0.0):
        self.terms: dict = {k: float(c) for k, c in (terms or {}).items() if c != 0.0}
        self.constant = float(constant)

    @classmethod
    def var(cls, key: Hashable, coef: float = 1.0) -> "LinearExpression":
        return cls({key: coef})

    @classmethod
    def const(cls, value: float) -> "LinearExpression":
        return cls(None, value)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: "LinearExpression | float") -> "LinearExpression":
        if not isinstance(other, LinearExpression):
            return LinearExpression(self.terms, self.constant + float(other))
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0.0) + c
        return LinearExpression(terms, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "LinearExpression":
        return LinearExpression({k: -c for k, c in self.terms.items()}, -self.constant)

    def __sub__(self, other: "LinearExpression | float") -> "LinearExpression":
        if not isinstance(other, LinearExpression):
            return self + (-float(other))
        return self + (-other)

    def __rsub__(self, other: float) -> "LinearExpression":
        return (-self) + other

    def __mul__(self, factor: float) -> "LinearExpression":
        factor = float(factor)
        if factor == 0.0:
            return LinearExpression()
        return LinearExpression({k: c * factor for k, c in self.terms.items()},
                                self.constant * factor)

    __rmul__ = __mul__

    def add_term(self, key: Hashable, coef: float) -> "LinearExpression":
        """Return a copy with ``coef * key`` added."""
        terms = dict(self.terms)
        terms[key] = terms.get(key, 0.0) + coef
        return LinearExpression(terms, self.constant)

    # queries --------------------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return not self.terms

    def keys(self) -> set:
        return set(self.terms)

    def coefficient(self, key: Hashable) -> float:
        return self.terms.get(key, 0.0)

    def without_constant(self) -> "LinearExpression":
        return LinearExpression(self.terms, 0.0)

    def evaluate(self, values: Mapping[Hashable, float]) -> float:
        total = self.constant
        for key, coef in self.terms.items():
            try:
                total += coef * values[key]
            except KeyError:
                raise UnboundFluent(key) from None
        return total

    def substitute(self, values: Mapping[Hashable, float]) -> "LinearExpression":
        """Fold every key that has a known value into the constant."""
        terms = {}
        constant = self.constant
        for key, coef in self.terms.items():
            if key in values:
                constant += coef * values[key]
            else:
                terms[key] = coef
        return LinearExpression(terms, constant)

    def rename(self, mapping: Callable[[Hashable], "LinearExpression"]) -> "LinearExpression":
        """Replace each key by a linear expression."""
        out = LinearExpression.const(self.constant)
        for key, coef in self.terms.items():
            out = out + mapping(key) * coef
        return out

    def interval(self, bounds: Mapping[Hashable, tuple[float, float]]) -> tuple[float, float]:
        lo = hi = self.constant
        for key, coef in self.terms.items():
            try:
                b_lo, b_hi = bounds[key]
            except KeyError:
                raise UnboundFluent(key) from None
            a, b = _scale_interval(coef, b_lo, b_hi)
            lo += a
            hi += b
        return lo, hi

    # identity -------------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearExpression):
            return NotImplemented
        return self.terms == other.terms and self.constant == other.constant

    def __hash__(self) -> int:
        return hash((frozenset(self.terms.items()), self.constant))

    def __repr__(self) -> str:
        parts = [f"{c:+g}*{k}" for k, c in self.terms.items()]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return "Lin(" + " ".join(parts) + ")"


def _scale_interval(coef: float, lo: float, hi: float) -> tuple[float, float]:
    if coef >= 0:
        return _mul0(coef, lo), _mul0(coef, hi)
    return _mul0(coef, hi), _mul0(coef, lo)


def _mul0(a: float, b: float) -> float:
    """Multiplication where 0 * inf is 0 (interval convention)."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


# ---------------------------------------------------------------------------
# expression trees


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Ref:
    key: Hashable


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


Expr = Union[Const, Ref, BinOp, Neg]


def refs(expr: Expr) -> set:
    """All leaf keys of a tree."""
    out: set = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Ref):
            out.add(node.key)
        elif isinstance(node, BinOp):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Neg):
            stack.append(node.arg)
    return out


def substitute(expr: Expr, values: Mapping[Hashable, float]) -> Expr:
    """Replace known leaves by constants and fold constant subtrees."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Ref):
        if expr.key in values:
            return Const(float(values[expr.key]))
        return expr
    if isinstance(expr, Neg):
        arg = substitute(expr.arg, values)
        if isinstance(arg, Const):
            return Const(-arg.value)
        return Neg(arg)
    left = substitute(expr.left, values)
    right = substitute(expr.right, values)
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(_apply(expr.op, left.value, right.value))
    return BinOp(expr.op, left, right)


def _apply(op: str, a: float, b: float) -> float:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0.0:
            raise ZeroDivisionError("division by zero in numeric expression")
        return a / b
    raise ValueError(f"unknown operator {op}")


def evaluate_tree(expr: Expr, values: Mapping[Hashable, float]) -> float:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Ref):
        try:
            return float(values[expr.key])
        except KeyError:
            raise UnboundFluent(expr.key) from None
    if isinstance(expr, Neg):
        return -evaluate_tree(expr.arg, values)
    return _apply(expr.op, evaluate_tree(expr.left, values), evaluate_tree(expr.right, values))


def linearize(expr: Expr, values: Mapping[Hashable, float] | None = None) -> LinearExpression:
    """Linear normal form of ``expr`` with ``values`` folded in.

    Raises :class:`NonlinearExpression` if a product or quotient has a
    non-constant factor on both sides (or a non-constant divisor).
    """
    values = values or {}
    if isinstance(expr, Const):
        return LinearExpression.const(expr.value)
    if isinstance(expr, Ref):
        if expr.key in values:
            return LinearExpression.const(values[expr.key])
        return LinearExpression.var(expr.key)
    if isinstance(expr, Neg):
        return -linearize(expr.arg, values)
    left = linearize(expr.left, values)
    right = linearize(expr.right, values)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        if left.is_constant:
            return right * left.constant
        if right.is_constant:
            return left * right.constant
        raise NonlinearExpression(f"product of non-constant terms: {expr}")
    if expr.op == "/":
        if not right.is_constant:
            raise NonlinearExpression(f"non-constant divisor: {expr}")
        if right.constant == 0.0:
            raise ZeroDivisionError("division by zero in numeric expression")
        return left * (1.0 / right.constant)
    raise ValueError(f"unknown operator {expr.op}")


def is_linear(expr: Expr) -> bool:
    try:
        linearize(expr)
    except NonlinearExpression:
        return False
    return True


def interval_eval(expr: Expr, bounds: Mapping[Hashable, tuple[float, float]]) -> tuple[float, float]:
    """Interval extension of a tree; unknown leaves raise UnboundFluent."""
    if isinstance(expr, Const):
        return expr.value, expr.value
    if isinstance(expr, Ref):
        try:
            return bounds[expr.key]
        except KeyError:
            raise UnboundFluent(expr.key) from None
    if isinstance(expr, Neg):
        lo, hi = interval_eval(expr.arg, bounds)
        return -hi, -lo
    a_lo, a_hi = interval_eval(expr.left, bounds)
    b_lo, b_hi = interval_eval(expr.right, bounds)
    if expr.op == "+":
        return a_lo + b_lo, a_hi + b_hi
    if expr.op == "-":
        return a_lo - b_hi, a_hi - b_lo
    if expr.op == "*":
        prods = [_mul0(x, y) for x in (a_lo, a_hi) for y in (b_lo, b_hi)]
        return min(prods), max(prods)
    if expr.op == "/":
        if b_lo <= 0.0 <= b_hi:
            return -INF, INF
        quots = [_div_inf(x, y) for x in (a_lo, a_hi) for y in (b_lo, b_hi)]
        return min(quots), max(quots)
    raise ValueError(f"unknown operator {expr.op}")


def _div_inf(a: float, b: float) -> float:
    if math.isinf(b):
        return 0.0 if not math.isinf(a) else math.copysign(INF, a) * math.copysign(1.0, b)
    return a / b


def interval_union(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    return min(a[0], b[0]), max(a[1], b[1])


def from_linear(lin: LinearExpression) -> Expr:
    """Tree form of a linear expression (used by printers and tests)."""
    node: Expr | None = None
    for key, coef in lin.terms.items():
        term: Expr = Ref(key) if coef == 1.0 else BinOp("*", Const(coef), Ref(key))
        node = term if node is None else BinOp("+", node, term)
    if node is None:
        return Const(lin.constant)
    if lin.constant:
        node = BinOp("+", node, Const(lin.constant))
    return node


def sum_trees(items: Iterable[Expr]) -> Expr:
    node: Expr | None = None
    for item in items:
        node = item if node is None else BinOp("+", node, item)
    return node if node is not None else Const(0.0)
