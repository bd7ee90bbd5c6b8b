"""Tokenizer and recursive-descent parser for the supported PDDL subset."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import PddlSyntaxError, UnsupportedFeature
from . import ast

SUPPORTED_REQUIREMENTS = frozenset({
    ":typing", ":durative-actions", ":duration-inequalities", ":fluents",
    ":continuous-effects", ":negative-preconditions",
})
# Accepted as synonyms of features above (or of the base language).
REQUIREMENT_ALIASES = frozenset({":strips", ":numeric-fluents"})

COMPARATORS = ("<", "<=", "=", ">=", ">")
ASSIGN_OPS = ("assign", "increase", "decrease", "scale-up", "scale-down")
ARITH_OPS = ("+", "-", "*", "/")

_UNSUPPORTED_KEYWORDS = {
    ":process": "process", ":event": "event", ":derived": "derived predicates",
    ":timed-initial-literals": "timed initial literals",
}
_UNSUPPORTED_FORMS = {
    "or": "disjunctive conditions", "imply": "implications", "exists": "existential conditions",
    "forall": "universal quantification", "when": "conditional effects",
    "either": "either-types", "preference": "preferences",
}


@dataclass
class Token:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            tokens.append(Token(ch, line, col))
            i += 1
            col += 1
            continue
        start, start_col = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        tokens.append(Token(text[start:i].lower(), line, start_col))
    return tokens


def read_sexpr(text: str):
    """Parse text into one nested :class:`SList` tree."""
    tokens = tokenize(text)
    if not tokens:
        raise PddlSyntaxError("empty input", 1, 1, expected=("(",))
    stack: list[SList] = []
    root = None
    for tok in tokens:
        if tok.text == "(":
            node = SList([], tok.line, tok.col)
            if stack:
                stack[-1].items.append(node)
            elif root is not None:
                raise PddlSyntaxError("trailing content after top-level form", tok.line, tok.col)
            else:
                root = node
            stack.append(node)
        elif tok.text == ")":
            if not stack:
                raise PddlSyntaxError("unbalanced ')'", tok.line, tok.col)
            stack.pop()
        else:
            if not stack:
                raise PddlSyntaxError(f"unexpected token '{tok.text}'", tok.line, tok.col,
                                      expected=("(",))
            stack[-1].items.append(tok)
    if stack:
        last = tokens[-1]
        raise PddlSyntaxError("unexpected end of input", last.line, last.col, expected=(")",))
    return root


def _where(node):
    if isinstance(node, (Token, SList)):
        return node.line, node.col
    return None, None


def _fail(msg, node, expected=()):
    line, col = _where(node)
    raise PddlSyntaxError(msg, line, col, expected=expected)


def _unsupported(construct, node):
    line, col = _where(node)
    raise UnsupportedFeature(construct, line, col)


def _word(node, what="identifier") -> str:
    if not isinstance(node, Token):
        _fail(f"expected {what}", node, expected=(what,))
    return node.text


def _head(node: SList) -> str | None:
    if node.items and isinstance(node.items[0], Token):
        return node.items[0].text
    return None


def _expect_list(node, what="list") -> SList:
    if not isinstance(node, SList):
        _fail(f"expected {what}", node, expected=("(",))
    return node


def _typed_list(items: list, allow_vars: bool) -> tuple:
    """Parse ``a b - t c`` style lists into TypedName tuples."""
    out: list = []
    pending: list[Token] = []
    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, SList):
            if _head(item) == "either":
                _unsupported("either-types", item)
            _fail("unexpected list in typed list", item)
        if item.text == "-":
            if i + 1 >= len(items):
                _fail("missing type after '-'", item, expected=("type name",))
            tnode = items[i + 1]
            if isinstance(tnode, SList):
                if _head(tnode) == "either":
                    _unsupported("either-types", tnode)
                _fail("expected type name", tnode)
            for p in pending:
                out.append(ast.TypedName(p.text, tnode.text, (p.line, p.col)))
            pending = []
            i += 2
            continue
        if allow_vars and not item.text.startswith("?"):
            _fail(f"expected variable, got '{item.text}'", item, expected=("?variable",))
        pending.append(item)
        i += 1
    for p in pending:
        out.append(ast.TypedName(p.text, "object", (p.line, p.col)))
    return tuple(out)


# expressions ---------------------------------------------------------------

def parse_expr(node) -> ast.NumExpr:
    if isinstance(node, Token):
        t = node.text
        pos = (node.line, node.col)
        if t == "?duration":
            return ast.DurationRef(pos)
        if t == "#t":
            return ast.TimeRef(pos)
        if t == "total-time":
            return ast.TotalTimeRef(pos)
        try:
            return ast.Number(float(t), pos)
        except ValueError:
            pass
        if t.startswith("?"):
            _fail(f"variable '{t}' is not a numeric expression", node,
                  expected=("number", "function term"))
        # 0-ary function written without parentheses
        return ast.FluentTerm(t, (), pos)
    head = _head(node)
    if head is None:
        _fail("expected numeric expression", node, expected=("number", "(function ...)"))
    args = node.items[1:]
    if head in ARITH_OPS:
        if head == "-" and len(args) == 1:
            return ast.Minus(parse_expr(args[0]), node.pos)
        if len(args) < 2:
            _fail(f"operator '{head}' needs two operands", node)
        result = parse_expr(args[0])
        for a in args[1:]:
            result = ast.BinaryExpr(head, result, parse_expr(a), node.pos)
        return result
    if head == "total-time":
        return ast.TotalTimeRef(node.pos)
    return _fluent_term(node)


def _fluent_term(node: SList) -> ast.FluentTerm:
    name = _word(node.items[0], "function name")
    args = []
    for a in node.items[1:]:
        args.append(_word(a, "term"))
    return ast.FluentTerm(name, tuple(args), node.pos)


def _atom(node: SList) -> ast.Atom:
    name = _word(node.items[0], "predicate name")
    return ast.Atom(name, tuple(_word(a, "term") for a in node.items[1:]), node.pos)


# conditions ----------------------------------------------------------------

def parse_condition(node, timed: bool = False) -> ast.Cond:
    node = _expect_list(node, "condition")
    head = _head(node)
    if head is None and not node.items:
        return ast.AndCond((), node.pos)
    if head in _UNSUPPORTED_FORMS:
        _unsupported(_UNSUPPORTED_FORMS[head], node)
    if head == "and":
        return ast.AndCond(tuple(parse_condition(c, timed) for c in node.items[1:]), node.pos)
    if head == "not":
        if len(node.items) != 2:
            _fail("'not' takes one argument", node)
        inner = _expect_list(node.items[1], "atom")
        ih = _head(inner)
        if ih in _UNSUPPORTED_FORMS:
            _unsupported(_UNSUPPORTED_FORMS[ih], inner)
        if ih in COMPARATORS or ih in ("and", "not"):
            _unsupported("negation of non-atomic condition", inner)
        return ast.NotCond(_atom(inner), node.pos)
    if head in ("at", "over"):
        if not timed:
            _fail("timed condition outside a durative action", node)
        if len(node.items) != 3:
            _fail("malformed timed condition", node)
        spec = _word(node.items[1], "start/end/all")
        if head == "at" and spec in ("start", "end"):
            when = spec
        elif head == "over" and spec == "all":
            when = "all"
        else:
            _fail(f"unknown time specifier '{head} {spec}'", node,
                  expected=("at start", "at end", "over all"))
        return ast.TimedCond(when, parse_condition(node.items[2], False), node.pos)
    if head in COMPARATORS:
        if len(node.items) != 3:
            _fail(f"comparison '{head}' takes two operands", node)
        return ast.Comparison(head, parse_expr(node.items[1]), parse_expr(node.items[2]), node.pos)
    if head is None:
        _fail("expected condition", node)
    return _atom(node)


# effects -------------------------------------------------------------------

def _contains_time(expr: ast.NumExpr) -> bool:
    if isinstance(expr, ast.TimeRef):
        return True
    if isinstance(expr, ast.BinaryExpr):
        return _contains_time(expr.left) or _contains_time(expr.right)
    if isinstance(expr, ast.Minus):
        return _contains_time(expr.arg)
    return False


def parse_effect(node, timed: bool = False) -> ast.Eff:
    node = _expect_list(node, "effect")
    head = _head(node)
    if head is None and not node.items:
        return ast.AndEffect((), node.pos)
    if head in _UNSUPPORTED_FORMS:
        _unsupported(_UNSUPPORTED_FORMS[head], node)
    if head == "and":
        return ast.AndEffect(tuple(parse_effect(e, timed) for e in node.items[1:]), node.pos)
    if head == "not":
        if len(node.items) != 2:
            _fail("'not' takes one argument", node)
        return ast.DelEffect(_atom(_expect_list(node.items[1], "atom")), node.pos)
    if head == "at" and len(node.items) == 3 and isinstance(node.items[1], Token) \
            and node.items[1].text in ("start", "end"):
        if not timed:
            _fail("timed effect outside a durative action", node)
        return ast.TimedEffect(node.items[1].text, parse_effect(node.items[2], False), node.pos)
    if head in ASSIGN_OPS:
        if len(node.items) != 3:
            _fail(f"'{head}' takes a function term and a value", node)
        fl = parse_expr(node.items[1])
        if not isinstance(fl, ast.FluentTerm):
            _fail("assignment target must be a function term", node.items[1])
        value = parse_expr(node.items[2])
        if _contains_time(value):
            if head not in ("increase", "decrease"):
                _unsupported(f"#t inside '{head}'", node)
            if not timed:
                _fail("continuous effect outside a durative action", node)
            return ast.ContinuousEffectAst(head, fl, value, node.pos)
        return ast.AssignEffect(head, fl, value, node.pos)
    if head is None:
        _fail("expected effect", node)
    return ast.AddEffect(_atom(node), node.pos)


def _parse_duration(node) -> tuple:
    node = _expect_list(node, "duration constraint")
    head = _head(node)
    if head == "and":
        out: list = []
        for c in node.items[1:]:
            out.extend(_parse_duration(c))
        return tuple(out)
    if head in ("at",):
        _unsupported("timed duration constraints", node)
    if head not in ("=", "<=", ">=", "<", ">") or len(node.items) != 3:
        _fail("malformed duration constraint", node, expected=("(= ?duration ...)",))
    lhs = node.items[1]
    if not (isinstance(lhs, Token) and lhs.text == "?duration"):
        _fail("duration constraint must constrain ?duration", lhs, expected=("?duration",))
    return (ast.DurationConstraintAst(head, parse_expr(node.items[2]), node.pos),)


# top level -----------------------------------------------------------------

def _sections(root: SList, kind: str):
    if _head(root) != "define":
        _fail("expected (define ...)", root, expected=("define",))
    if len(root.items) < 2:
        _fail("missing name", root)
    header = _expect_list(root.items[1], f"({kind} name)")
    if _head(header) != kind or len(header.items) != 2:
        _fail(f"expected ({kind} name)", header, expected=(kind,))
    return _word(header.items[1], f"{kind} name"), root.items[2:]


def _keyword_pairs(items: list, node) -> dict:
    """Read ``:key value`` pairs inside an action body."""
    out = {}
    i = 0
    while i < len(items):
        key = items[i]
        if not isinstance(key, Token) or not key.text.startswith(":"):
            _fail("expected keyword", key, expected=(":parameters", ":precondition", ":effect"))
        if i + 1 >= len(items):
            _fail(f"missing value for {key.text}", key)
        out[key.text] = (items[i + 1], key)
        i += 2
    return out


def _check_requirements(items: list) -> tuple:
    reqs = []
    for item in items:
        word = _word(item, "requirement")
        if word not in SUPPORTED_REQUIREMENTS and word not in REQUIREMENT_ALIASES:
            _unsupported(f"requirement {word}", item)
        reqs.append(word)
    return tuple(reqs)


def parse_domain(text: str, filename: str | None = None) -> ast.DomainAst:
    """Parse a ``(define (domain ...))`` form."""
    try:
        return _parse_domain(read_sexpr(text))
    except (PddlSyntaxError, UnsupportedFeature) as exc:
        if filename:
            exc.with_filename(filename)
        raise


def _parse_domain(root: SList) -> ast.DomainAst:
    name, sections = _sections(root, "domain")
    dom = dict(requirements=(), types=(), constants=(), predicates=(), functions=())
    actions, durative = [], []
    for sec in sections:
        sec = _expect_list(sec, "domain section")
        head = _head(sec)
        if head in _UNSUPPORTED_KEYWORDS:
            _unsupported(_UNSUPPORTED_KEYWORDS[head], sec)
        if head == ":requirements":
            dom["requirements"] = _check_requirements(sec.items[1:])
        elif head == ":types":
            dom["types"] = _typed_list(sec.items[1:], allow_vars=False)
        elif head == ":constants":
            dom["constants"] = _typed_list(sec.items[1:], allow_vars=False)
        elif head == ":predicates":
            dom["predicates"] = tuple(
                ast.Signature(_word(p.items[0]), _typed_list(p.items[1:], True), p.pos)
                for p in (_expect_list(x, "predicate") for x in sec.items[1:]))
        elif head == ":functions":
            funcs = []
            items = sec.items[1:]
            i = 0
            while i < len(items):
                f = items[i]
                if isinstance(f, Token) and f.text == "-":
                    if i + 1 >= len(items) or _word(items[i + 1]) != "number":
                        _unsupported("non-numeric function type", f)
                    i += 2
                    continue
                f = _expect_list(f, "function declaration")
                funcs.append(ast.Signature(_word(f.items[0]), _typed_list(f.items[1:], True), f.pos))
                i += 1
            dom["functions"] = tuple(funcs)
        elif head == ":action":
            actions.append(_parse_action(sec))
        elif head == ":durative-action":
            durative.append(_parse_durative(sec))
        else:
            _fail(f"unknown domain section '{head}'", sec,
                  expected=(":requirements", ":types", ":predicates", ":functions", ":action",
                            ":durative-action"))
    return ast.DomainAst(name, actions=tuple(actions), durative_actions=tuple(durative),
                         pos=root.pos, **dom)


def _params(node) -> tuple:
    return _typed_list(_expect_list(node, "parameter list").items, allow_vars=True)


def _parse_action(sec: SList) -> ast.ActionSchema:
    name = _word(sec.items[1], "action name")
    kv = _keyword_pairs(sec.items[2:], sec)
    for key, (_, tok) in kv.items():
        if key not in (":parameters", ":precondition", ":effect"):
            _fail(f"unexpected keyword {key}", tok)
    params = _params(kv[":parameters"][0]) if ":parameters" in kv else ()
    pre = parse_condition(kv[":precondition"][0]) if ":precondition" in kv else ast.AndCond(())
    eff = parse_effect(kv[":effect"][0]) if ":effect" in kv else ast.AndEffect(())
    return ast.ActionSchema(name, params, pre, eff, sec.pos)


def _parse_durative(sec: SList) -> ast.DurativeSchema:
    name = _word(sec.items[1], "action name")
    kv = _keyword_pairs(sec.items[2:], sec)
    for key, (_, tok) in kv.items():
        if key not in (":parameters", ":duration", ":condition", ":effect"):
            _fail(f"unexpected keyword {key}", tok)
    if ":duration" not in kv:
        _fail("durative action without :duration", sec, expected=(":duration",))
    params = _params(kv[":parameters"][0]) if ":parameters" in kv else ()
    duration = _parse_duration(kv[":duration"][0])
    cond = parse_condition(kv[":condition"][0], timed=True) if ":condition" in kv \
        else ast.AndCond(())
    _check_timed_cond(cond)
    eff = parse_effect(kv[":effect"][0], timed=True) if ":effect" in kv else ast.AndEffect(())
    _check_timed_eff(eff)
    return ast.DurativeSchema(name, params, duration, cond, eff, sec.pos)


def _check_timed_cond(cond):
    if isinstance(cond, ast.AndCond):
        for c in cond.items:
            _check_timed_cond(c)
    elif not isinstance(cond, ast.TimedCond):
        line, col = cond.pos if cond.pos else (None, None)
        raise PddlSyntaxError("durative condition must be wrapped in at start/at end/over all",
                              line, col, expected=("at start", "at end", "over all"))


def _check_timed_eff(eff):
    if isinstance(eff, ast.AndEffect):
        for e in eff.items:
            _check_timed_eff(e)
    elif not isinstance(eff, (ast.TimedEffect, ast.ContinuousEffectAst)):
        line, col = eff.pos if eff.pos else (None, None)
        raise PddlSyntaxError("durative effect must be wrapped in at start/at end or be continuous",
                              line, col, expected=("at start", "at end"))


def parse_problem(text: str, filename: str | None = None) -> ast.ProblemAst:
    """Parse a ``(define (problem ...))`` form."""
    try:
        return _parse_problem(read_sexpr(text))
    except (PddlSyntaxError, UnsupportedFeature) as exc:
        if filename:
            exc.with_filename(filename)
        raise


def _parse_problem(root: SList) -> ast.ProblemAst:
    name, sections = _sections(root, "problem")
    out = dict(domain=None, requirements=(), objects=(), init=(), goal=ast.AndCond(()), metric=None)
    for sec in sections:
        sec = _expect_list(sec, "problem section")
        head = _head(sec)
        if head == ":domain":
            out["domain"] = _word(sec.items[1], "domain name")
        elif head == ":requirements":
            out["requirements"] = _check_requirements(sec.items[1:])
        elif head == ":objects":
            out["objects"] = _typed_list(sec.items[1:], allow_vars=False)
        elif head == ":init":
            out["init"] = tuple(_init_item(x) for x in sec.items[1:])
        elif head == ":goal":
            if len(sec.items) != 2:
                _fail("goal takes exactly one condition", sec)
            out["goal"] = parse_condition(sec.items[1])
        elif head == ":metric":
            if len(sec.items) != 3:
                _fail("malformed metric", sec, expected=("(:metric minimize <expr>)",))
            direction = _word(sec.items[1], "minimize/maximize")
            if direction not in ("minimize", "maximize"):
                _fail(f"unknown metric direction '{direction}'", sec.items[1],
                      expected=("minimize", "maximize"))
            out["metric"] = ast.MetricAst(direction, parse_expr(sec.items[2]), sec.pos)
        elif head in ("at", ":timed-initial-literals"):
            _unsupported("timed initial literals", sec)
        else:
            _fail(f"unknown problem section '{head}'", sec,
                  expected=(":domain", ":objects", ":init", ":goal", ":metric"))
    if out["domain"] is None:
        _fail("problem without (:domain ...)", root, expected=(":domain",))
    return ast.ProblemAst(name, pos=root.pos, **out)


def _init_item(node) -> object:
    node = _expect_list(node, "initial fact")
    head = _head(node)
    if head == "=":
        if len(node.items) != 3:
            _fail("malformed fluent initialisation", node)
        fl = parse_expr(node.items[1])
        if not isinstance(fl, ast.FluentTerm):
            _fail("expected function term", node.items[1])
        val = node.items[2]
        try:
            value = float(_word(val, "number"))
        except ValueError:
            _fail("expected number", val, expected=("number",))
        return ast.FluentInit(fl, value, node.pos)
    if head == "at" and len(node.items) == 3 and isinstance(node.items[1], Token):
        try:
            float(node.items[1].text)
        except ValueError:
            pass
        else:
            _unsupported("timed initial literals", node)
    if head == "not":
        _unsupported("negative initial literals", node)
    if head is None:
        _fail("expected atom", node)
    return _atom(node)
