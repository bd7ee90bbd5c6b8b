"""Render AST nodes back to PDDL text."""

from __future__ import annotations

from . import ast


def fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def expr_to_str(e: ast.NumExpr) -> str:
    if isinstance(e, ast.Number):
        return fmt_number(e.value)
    if isinstance(e, ast.FluentTerm):
        return "(" + " ".join((e.name,) + tuple(e.args)) + ")"
    if isinstance(e, ast.DurationRef):
        return "?duration"
    if isinstance(e, ast.TotalTimeRef):
        return "(total-time)"
    if isinstance(e, ast.TimeRef):
        return "#t"
    if isinstance(e, ast.Minus):
        return f"(- {expr_to_str(e.arg)})"
    if isinstance(e, ast.BinaryExpr):
        return f"({e.op} {expr_to_str(e.left)} {expr_to_str(e.right)})"
    raise TypeError(f"not an expression: {e!r}")


def _atom(a: ast.Atom) -> str:
    return "(" + " ".join((a.predicate,) + tuple(a.args)) + ")"


def cond_to_str(c: ast.Cond) -> str:
    if isinstance(c, ast.Atom):
        return _atom(c)
    if isinstance(c, ast.NotCond):
        return f"(not {_atom(c.arg)})"
    if isinstance(c, ast.Comparison):
        return f"({c.cmp} {expr_to_str(c.left)} {expr_to_str(c.right)})"
    if isinstance(c, ast.AndCond):
        return "(and" + "".join(" " + cond_to_str(x) for x in c.items) + ")"
    if isinstance(c, ast.TimedCond):
        wrapper = "over all" if c.when == "all" else f"at {c.when}"
        return f"({wrapper} {cond_to_str(c.cond)})"
    raise TypeError(f"not a condition: {c!r}")


def effect_to_str(e: ast.Eff) -> str:
    if isinstance(e, ast.AddEffect):
        return _atom(e.atom)
    if isinstance(e, ast.DelEffect):
        return f"(not {_atom(e.atom)})"
    if isinstance(e, (ast.AssignEffect, ast.ContinuousEffectAst)):
        return f"({e.op} {expr_to_str(e.fluent)} {expr_to_str(e.value)})"
    if isinstance(e, ast.AndEffect):
        return "(and" + "".join(" " + effect_to_str(x) for x in e.items) + ")"
    if isinstance(e, ast.TimedEffect):
        return f"(at {e.when} {effect_to_str(e.effect)})"
    raise TypeError(f"not an effect: {e!r}")


def _typed(names) -> str:
    return " ".join(f"{n.name} - {n.type}" for n in names)


def _signature(s: ast.Signature) -> str:
    inner = " ".join([s.name] + ([_typed(s.params)] if s.params else []))
    return f"({inner})"


def _duration(cs) -> str:
    parts = [f"({c.cmp} ?duration {expr_to_str(c.value)})" for c in cs]
    return parts[0] if len(parts) == 1 else "(and " + " ".join(parts) + ")"


def domain_to_str(d: ast.DomainAst) -> str:
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append("  (:requirements " + " ".join(d.requirements) + ")")
    if d.types:
        lines.append("  (:types " + _typed(d.types) + ")")
    if d.constants:
        lines.append("  (:constants " + _typed(d.constants) + ")")
    if d.predicates:
        lines.append("  (:predicates " + " ".join(_signature(p) for p in d.predicates) + ")")
    if d.functions:
        lines.append("  (:functions " + " ".join(_signature(f) for f in d.functions) + ")")
    for a in d.actions:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_typed(a.parameters)})")
        lines.append(f"    :precondition {cond_to_str(a.precondition)}")
        lines.append(f"    :effect {effect_to_str(a.effect)})")
    for a in d.durative_actions:
        lines.append(f"  (:durative-action {a.name}")
        lines.append(f"    :parameters ({_typed(a.parameters)})")
        lines.append(f"    :duration {_duration(a.duration)}")
        lines.append(f"    :condition {cond_to_str(a.condition)}")
        lines.append(f"    :effect {effect_to_str(a.effect)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def problem_to_str(p: ast.ProblemAst) -> str:
    lines = [f"(define (problem {p.name})", f"  (:domain {p.domain})"]
    if p.requirements:
        lines.append("  (:requirements " + " ".join(p.requirements) + ")")
    if p.objects:
        lines.append("  (:objects " + _typed(p.objects) + ")")
    lines.append("  (:init")
    for item in p.init:
        if isinstance(item, ast.FluentInit):
            lines.append(f"    (= {expr_to_str(item.fluent)} {fmt_number(item.value)})")
        else:
            lines.append("    " + _atom(item))
    lines.append("  )")
    lines.append(f"  (:goal {cond_to_str(p.goal)})")
    if p.metric is not None:
        lines.append(f"  (:metric {p.metric.direction} {expr_to_str(p.metric.expr)})")
    lines.append(")")
    return "\n".join(lines) + "\n"
