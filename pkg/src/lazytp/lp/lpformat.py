"""CPLEX-LP text rendering of a :class:`LinearProgramModel`."""

from __future__ import annotations

import math
import re

from ..expr import LinearExpression
from .model import LinearProgramModel


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.]", "_", name) or "x"


def _terms(expr: LinearExpression, names: list[str]) -> str:
    parts = []
    for k, c in expr.terms.items():
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {abs(c):.12g} {names[k]}")
    if not parts:
        return "0 " + (names[0] if names else "")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_format(model: LinearProgramModel, title: str = "model") -> str:
    names = [_safe(v.name) for v in model.variables]
    seen: dict[str, int] = {}
    for i, n in enumerate(names):
        if n in seen:
            names[i] = f"{n}_{i}"
        seen[names[i]] = i
    lines = [f"\\ {title}"]
    if model.objective is None:
        lines += ["Minimize", " obj: " + (f"0 {names[0]}" if names else "0")]
    else:
        lines += ["Maximize" if model.objective.direction == "max" else "Minimize",
                  " obj: " + _terms(model.objective.expr, names)]
    lines.append("Subject To")
    for i, row in enumerate(model.rows):
        label = _safe(row.name) if row.name else f"c{i}"
        cmp = {"<=": "<=", ">=": ">=", "=": "="}[row.cmp]
        lines.append(f" {label}_{i}: {_terms(row.expr, names)} {cmp} {row.rhs:.12g}")
    lines.append("Bounds")
    for v, n in zip(model.variables, names):
        lo = "-inf" if v.lower == -math.inf else f"{v.lower:.12g}"
        hi = "+inf" if v.upper == math.inf else f"{v.upper:.12g}"
        lines.append(f" {lo} <= {n} <= {hi}")
    lines.append("End")
    return "\n".join(lines) + "\n"
