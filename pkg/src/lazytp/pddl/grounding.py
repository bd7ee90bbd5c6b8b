"""Grounding of parsed domain/problem ASTs into a :class:`GroundedProblem`."""

from __future__ import annotations

from itertools import product

from ..errors import SemanticError, UnsupportedFeature
from ..errors import NonlinearExpression
from ..expr import (DURATION, TOTAL_TIME, BinOp, Const, Expr, Neg, Ref, linearize, refs,
                    substitute)
from ..model import (Condition, ContinuousEffect, DurationConstraint, DurativeAction, Effects,
                     GroundedProblem, InstantAction, Metric, NumericCondition, NumericEffect,
                     compare)
from . import ast

_ASSIGN_MAP = {"assign": ":=", "increase": "+=", "decrease": "-=", "scale-up": "*=",
               "scale-down": "/="}
_TIME_KEY = "#t"


class _Prune(Exception):
    """Raised while grounding a binding whose static part cannot hold."""


def _term_name(name: str, args) -> str:
    return "(" + " ".join((name,) + tuple(args)) + ")"


class _Grounder:
    def __init__(self, domain: ast.DomainAst, problem: ast.ProblemAst):
        self.domain = domain
        self.problem = problem
        self._build_types()
        self._build_objects()
        self.predicates = {p.name: p for p in domain.predicates}
        self.functions = {f.name: f for f in domain.functions}
        self._find_static()
        self._read_init()
        self.facts: list[str] = []
        self.fact_index: dict[str, int] = {}
        self.fluents: list[str] = []
        self.fluent_index: dict[str, int] = {}
        for name in sorted(self.init_facts_named):
            self._fact(name)
        for name in sorted(self.init_values_named):
            if self._is_dynamic_fluent_name(name):
                self._fluent(name)

    # tables --------------------------------------------------------------
    def _build_types(self):
        parents = {"object": None, "number": None}
        for t in self.domain.types:
            if t.name == "object":
                continue
            parents[t.name] = t.type
        for t, p in parents.items():
            if p is not None and p not in parents:
                raise SemanticError(f"undeclared parent type '{p}' of '{t}'", *(t_pos(self.domain.types, t)))
        self.type_parents = parents

    def _is_subtype(self, t: str, super_t: str) -> bool:
        seen = set()
        while t is not None and t not in seen:
            if t == super_t:
                return True
            seen.add(t)
            t = self.type_parents.get(t)
        return super_t == "object"

    def _build_objects(self):
        objs: dict[str, str] = {}
        for o in tuple(self.domain.constants) + tuple(self.problem.objects):
            if o.type not in self.type_parents:
                line, col = o.pos or (None, None)
                raise SemanticError(f"object '{o.name}' has undeclared type '{o.type}'", line, col)
            objs[o.name] = o.type
        self.objects = objs
        self.objects_of: dict[str, list[str]] = {}
        for t in self.type_parents:
            self.objects_of[t] = sorted(n for n, ot in objs.items() if self._is_subtype(ot, t))

    def _find_static(self):
        changed_preds, changed_funcs = set(), set()

        def walk(e):
            if isinstance(e, (ast.AndEffect,)):
                for x in e.items:
                    walk(x)
            elif isinstance(e, ast.TimedEffect):
                walk(e.effect)
            elif isinstance(e, (ast.AddEffect, ast.DelEffect)):
                changed_preds.add(e.atom.predicate)
            elif isinstance(e, (ast.AssignEffect, ast.ContinuousEffectAst)):
                changed_funcs.add(e.fluent.name)

        for a in self.domain.actions:
            walk(a.effect)
        for a in self.domain.durative_actions:
            walk(a.effect)
        self.dynamic_preds = changed_preds
        self.dynamic_funcs = changed_funcs

    def _check_args(self, sig, args, pos, kind):
        if sig is None:
            line, col = pos or (None, None)
            raise SemanticError(f"undeclared {kind}", line, col)
        if len(args) != len(sig.params):
            line, col = pos or (None, None)
            raise SemanticError(f"{kind} '{sig.name}' expects {len(sig.params)} arguments, "
                                f"got {len(args)}", line, col)
        for arg, param in zip(args, sig.params):
            if arg not in self.objects:
                line, col = pos or (None, None)
                raise SemanticError(f"undeclared object '{arg}'", line, col)
            if not self._is_subtype(self.objects[arg], param.type):
                line, col = pos or (None, None)
                raise SemanticError(f"object '{arg}' is not of type '{param.type}'", line, col)

    def _read_init(self):
        self.init_facts_named: set[str] = set()
        self.init_values_named: dict[str, float] = {}
        for item in self.problem.init:
            if isinstance(item, ast.FluentInit):
                f = item.fluent
                self._check_args(self.functions.get(f.name), f.args, f.pos or item.pos,
                                 f"function '{f.name}'")
                self.init_values_named[_term_name(f.name, f.args)] = item.value
            else:
                self._check_args(self.predicates.get(item.predicate), item.args, item.pos,
                                 f"predicate '{item.predicate}'")
                self.init_facts_named.add(_term_name(item.predicate, item.args))

    def _is_dynamic_fluent_name(self, name: str) -> bool:
        return name[1:-1].split()[0] in self.dynamic_funcs

    def _fact(self, name: str) -> int:
        idx = self.fact_index.get(name)
        if idx is None:
            idx = len(self.facts)
            self.facts.append(name)
            self.fact_index[name] = idx
        return idx

    def _fluent(self, name: str) -> int:
        idx = self.fluent_index.get(name)
        if idx is None:
            idx = len(self.fluents)
            self.fluents.append(name)
            self.fluent_index[name] = idx
        return idx

    # grounding of pieces ------------------------------------------------
    def _bind(self, args, binding, pos):
        out = []
        for a in args:
            if a.startswith("?"):
                if a not in binding:
                    line, col = pos or (None, None)
                    raise SemanticError(f"unbound variable '{a}'", line, col)
                out.append(binding[a])
            else:
                if a not in self.objects:
                    line, col = pos or (None, None)
                    raise SemanticError(f"undeclared object '{a}'", line, col)
                out.append(a)
        return tuple(out)

    def expr(self, e: ast.NumExpr, binding, allow_duration=False, allow_time=False) -> Expr:
        if isinstance(e, ast.Number):
            return Const(e.value)
        if isinstance(e, ast.FluentTerm):
            sig = self.functions.get(e.name)
            if sig is None:
                line, col = e.pos or (None, None)
                raise SemanticError(f"undeclared function '{e.name}'", line, col)
            args = self._bind(e.args, binding, e.pos)
            if len(args) != len(sig.params):
                line, col = e.pos or (None, None)
                raise SemanticError(f"function '{e.name}' expects {len(sig.params)} arguments",
                                    line, col)
            name = _term_name(e.name, args)
            if e.name in self.dynamic_funcs:
                return Ref(self._fluent(name))
            if name not in self.init_values_named:
                raise _Prune()  # undefined static value
            return Const(self.init_values_named[name])
        if isinstance(e, ast.DurationRef):
            if not allow_duration:
                line, col = e.pos or (None, None)
                raise SemanticError("?duration outside a durative action", line, col)
            return Ref(DURATION)
        if isinstance(e, ast.TotalTimeRef):
            return Ref(TOTAL_TIME)
        if isinstance(e, ast.TimeRef):
            if not allow_time:
                line, col = e.pos or (None, None)
                raise SemanticError("#t outside a continuous effect", line, col)
            return Ref(_TIME_KEY)
        if isinstance(e, ast.Minus):
            return substitute(Neg(self.expr(e.arg, binding, allow_duration, allow_time)), {})
        if isinstance(e, ast.BinaryExpr):
            left = self.expr(e.left, binding, allow_duration, allow_time)
            right = self.expr(e.right, binding, allow_duration, allow_time)
            try:
                return substitute(BinOp(e.op, left, right), {})
            except ZeroDivisionError:
                raise _Prune() from None
        raise TypeError(e)

    def condition(self, c: ast.Cond, binding, acc: dict, allow_duration=False):
        """Accumulate a condition into ``acc`` (keys pos/neg/num); raise _Prune if false."""
        if isinstance(c, ast.AndCond):
            for x in c.items:
                self.condition(x, binding, acc, allow_duration)
            return
        if isinstance(c, (ast.Atom, ast.NotCond)):
            atom = c if isinstance(c, ast.Atom) else c.arg
            sig = self.predicates.get(atom.predicate)
            if sig is None:
                line, col = atom.pos or (None, None)
                raise SemanticError(f"undeclared predicate '{atom.predicate}'", line, col)
            args = self._bind(atom.args, binding, atom.pos)
            if len(args) != len(sig.params):
                line, col = atom.pos or (None, None)
                raise SemanticError(f"predicate '{atom.predicate}' expects {len(sig.params)} "
                                    f"arguments", line, col)
            name = _term_name(atom.predicate, args)
            positive = isinstance(c, ast.Atom)
            if atom.predicate not in self.dynamic_preds:
                if (name in self.init_facts_named) != positive:
                    raise _Prune()
                return
            acc["pos" if positive else "neg"].add(self._fact(name))
            return
        if isinstance(c, ast.Comparison):
            left = self.expr(c.left, binding, allow_duration)
            right = self.expr(c.right, binding, allow_duration)
            diff = substitute(BinOp("-", left, right), {})
            if isinstance(diff, Const):
                if not compare(diff.value, c.cmp, 0.0):
                    raise _Prune()
                return
            acc["num"].append(NumericCondition(diff, c.cmp))
            return
        if isinstance(c, ast.TimedCond):
            line, col = c.pos or (None, None)
            raise SemanticError("timed condition outside a durative action", line, col)
        raise TypeError(c)

    @staticmethod
    def _make_condition(acc) -> Condition:
        return Condition(frozenset(acc["pos"]), frozenset(acc["neg"]), tuple(acc["num"]))

    def effect(self, e: ast.Eff, binding, acc: dict, allow_duration=False):
        if isinstance(e, ast.AndEffect):
            for x in e.items:
                self.effect(x, binding, acc, allow_duration)
            return
        if isinstance(e, (ast.AddEffect, ast.DelEffect)):
            atom = e.atom
            sig = self.predicates.get(atom.predicate)
            if sig is None:
                line, col = atom.pos or (None, None)
                raise SemanticError(f"undeclared predicate '{atom.predicate}'", line, col)
            args = self._bind(atom.args, binding, atom.pos)
            name = _term_name(atom.predicate, args)
            acc["adds" if isinstance(e, ast.AddEffect) else "dels"].add(self._fact(name))
            return
        if isinstance(e, ast.AssignEffect):
            target = self.expr(e.fluent, binding)
            if not isinstance(target, Ref):
                raise TypeError("assignment target did not ground to a fluent")
            value = self.expr(e.value, binding, allow_duration)
            acc["num"].append(NumericEffect(target.key, _ASSIGN_MAP[e.op], value))
            return
        raise TypeError(e)

    def continuous(self, e: ast.ContinuousEffectAst, binding) -> ContinuousEffect:
        target = self.expr(e.fluent, binding)
        value = self.expr(e.value, binding, allow_duration=False, allow_time=True)
        rate = _extract_rate(value)
        if rate is None:
            line, col = e.pos or (None, None)
            raise UnsupportedFeature("non-linear use of #t", line, col)
        if e.op == "decrease":
            rate = substitute(Neg(rate), {})
        return ContinuousEffect(target.key, rate)

    # schemas -------------------------------------------------------------
    def bindings(self, params):
        domains = []
        for p in params:
            if p.type not in self.objects_of:
                line, col = p.pos or (None, None)
                raise SemanticError(f"undeclared type '{p.type}'", line, col)
            domains.append(self.objects_of[p.type])
        names = [p.name for p in params]
        for combo in product(*domains):
            yield dict(zip(names, combo)), combo

    def ground_instant(self, schema: ast.ActionSchema):
        out = []
        for binding, combo in self.bindings(schema.parameters):
            try:
                pre = {"pos": set(), "neg": set(), "num": []}
                self.condition(schema.precondition, binding, pre)
                eff = {"adds": set(), "dels": set(), "num": []}
                self.effect(schema.effect, binding, eff)
            except _Prune:
                continue
            out.append((schema.name, combo, self._make_condition(pre), _make_effects(eff)))
        return out

    def ground_durative(self, schema: ast.DurativeSchema):
        out = []
        for binding, combo in self.bindings(schema.parameters):
            try:
                durs = []
                for dc in schema.duration:
                    ex = self.expr(dc.value, binding)
                    cmp = {"<": "<=", ">": ">="}.get(dc.cmp, dc.cmp)
                    durs.append(DurationConstraint(cmp, ex))
                conds = {w: {"pos": set(), "neg": set(), "num": []} for w in ("start", "end", "all")}
                effs = {w: {"adds": set(), "dels": set(), "num": []} for w in ("start", "end")}
                cont: list[ContinuousEffect] = []
                for tc in _flatten_cond(schema.condition):
                    self.condition(tc.cond, binding, conds[tc.when], allow_duration=True)
                for te in _flatten_eff(schema.effect):
                    if isinstance(te, ast.ContinuousEffectAst):
                        cont.append(self.continuous(te, binding))
                    else:
                        self.effect(te.effect, binding, effs[te.when], allow_duration=True)
                for w in ("start", "end", "all"):
                    for nc in conds[w]["num"]:
                        if DURATION in refs(nc.expr):
                            raise UnsupportedFeature(f"?duration inside a {w} condition of "
                                                     f"'{schema.name}'", *(schema.pos or (None, None)))
            except _Prune:
                continue
            static = [d for d in durs if isinstance(d.expr, Const)]
            lb = max([d.expr.value for d in static if d.cmp in (">=", "=")], default=0.0)
            ub = min([d.expr.value for d in static if d.cmp in ("<=", "=")], default=float("inf"))
            if lb > ub + 1e-9 or ub < 0:
                continue
            out.append((schema.name, combo, tuple(durs),
                        self._make_condition(conds["start"]), self._make_condition(conds["end"]),
                        self._make_condition(conds["all"]), _make_effects(effs["start"]),
                        _make_effects(effs["end"]), tuple(cont)))
        return out

    def run(self) -> GroundedProblem:
        inst = []
        for schema in self.domain.actions:
            inst.extend(self.ground_instant(schema))
        dur = []
        for schema in self.domain.durative_actions:
            dur.extend(self.ground_durative(schema))
        inst.sort(key=lambda r: (r[0], r[1]))
        dur.sort(key=lambda r: (r[0], r[1]))
        instant_actions = [InstantAction(i, r[0], tuple(r[1]), r[2], r[3])
                           for i, r in enumerate(inst)]
        durative_actions = [DurativeAction(i, r[0], tuple(r[1]), *r[2:])
                            for i, r in enumerate(dur)]
        goal_acc = {"pos": set(), "neg": set(), "num": []}
        unsat = False
        try:
            self.condition(self.problem.goal, {}, goal_acc)
        except _Prune:
            unsat = True
        goal = Condition(frozenset(goal_acc["pos"]), frozenset(goal_acc["neg"]),
                         tuple(goal_acc["num"]), unsat)
        metric = None
        if self.problem.metric is not None:
            try:
                metric = Metric(self.problem.metric.direction, self.expr(self.problem.metric.expr, {}))
            except _Prune:
                line, col = self.problem.metric.pos or (None, None)
                raise SemanticError("metric refers to an undefined value", line, col) from None
        init_facts = frozenset(self.fact_index[n] for n in self.init_facts_named
                               if n in self.fact_index)
        init_values = {self.fluent_index[n]: v for n, v in self.init_values_named.items()
                       if n in self.fluent_index}
        return GroundedProblem(
            name=self.problem.name, domain_name=self.domain.name,
            facts=list(self.facts), fluents=list(self.fluents),
            instant_actions=instant_actions, durative_actions=durative_actions,
            init_facts=init_facts, init_values=init_values, goal=goal, metric=metric,
            fact_index=dict(self.fact_index), fluent_index=dict(self.fluent_index))


def t_pos(types, name):
    for t in types:
        if t.name == name and t.pos:
            return t.pos
    return (None, None)


def _flatten_cond(c):
    if isinstance(c, ast.AndCond):
        for x in c.items:
            yield from _flatten_cond(x)
    else:
        yield c


def _flatten_eff(e):
    if isinstance(e, ast.AndEffect):
        for x in e.items:
            yield from _flatten_eff(x)
    else:
        yield e


def _make_effects(acc) -> Effects:
    adds = frozenset(acc["adds"])
    dels = frozenset(acc["dels"]) - adds  # add wins over delete within one happening
    return Effects(adds, dels, tuple(acc["num"]))


def _extract_rate(value: Expr) -> Expr | None:
    """Return ``rate`` for a continuous rvalue of the form ``#t * rate``."""
    if isinstance(value, Ref) and value.key == _TIME_KEY:
        return Const(1.0)
    if isinstance(value, BinOp) and value.op == "*":
        left_t = _TIME_KEY in refs(value.left)
        right_t = _TIME_KEY in refs(value.right)
        if left_t and not right_t and value.left == Ref(_TIME_KEY):
            return value.right
        if right_t and not left_t and value.right == Ref(_TIME_KEY):
            return value.left
        return None
    if isinstance(value, BinOp) and value.op == "/":
        if _TIME_KEY not in refs(value.right) and _TIME_KEY in refs(value.left):
            inner = _extract_rate(value.left)
            return None if inner is None else substitute(BinOp("/", inner, value.right), {})
    return None


def ground(domain: ast.DomainAst, problem: ast.ProblemAst) -> GroundedProblem:
    """Ground a domain/problem pair.

    Static predicates and functions (never written by any effect) are folded
    away; bindings whose static preconditions fail are dropped.
    """
    if problem.domain != domain.name:
        line, col = problem.pos or (None, None)
        raise SemanticError(f"problem is for domain '{problem.domain}', not '{domain.name}'",
                            line, col)
    return _Grounder(domain, problem).run()


def check_linear(problem: GroundedProblem) -> list[str]:
    """Names of grounded actions carrying expressions that are not linear in the fluents."""
    flagged = []
    for a in problem.durative_actions:
        exprs = [c.expr for cond in (a.start_cond, a.end_cond, a.inv_cond) for c in cond.numeric]
        exprs += [e.rvalue for eff in (a.start_eff, a.end_eff) for e in eff.numeric]
        for e in exprs:
            try:
                linearize(e)
            except NonlinearExpression:
                flagged.append(a.label)
                break
    return flagged
