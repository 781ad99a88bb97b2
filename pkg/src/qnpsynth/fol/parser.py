"""Formula text syntax (S-expressions) to AST."""

from __future__ import annotations

from .. import sexpr
from ..sexpr import fail
from .syntax import (
    FALSE,
    PLUS,
    STAR,
    TRUE,
    And,
    Atom,
    Closure,
    Const,
    Eq,
    Formula,
    Signature,
    Var,
    check_formula,
    exists,
    forall,
    Implies,
    Not,
    Or,
)


class _Ctx:
    def __init__(self, sig, source):
        self.sig = sig
        self.source = source

    def term(self, tok):
        if isinstance(tok, list):
            fail("expected a term, found a list", tok, self.source)
        if self.sig is not None:
            return Const(str(tok)) if tok in self.sig.constants else Var(str(tok))
        # no signature: uppercase-initial names are constants by convention
        return Const(str(tok)) if tok[:1].isupper() else Var(str(tok))


def parse_formula(text_or_expr, sig: Signature | None = None, source=None) -> Formula:
    """Parse a formula; with ``sig`` given, names are resolved and checked against it."""
    expr = sexpr.loads(text_or_expr, source) if isinstance(text_or_expr, str) else text_or_expr
    ctx = _Ctx(sig, source)
    f = _formula(expr, ctx)
    if sig is not None:
        try:
            check_formula(f, sig)
        except ValueError as e:
            fail(str(e), expr, source)
    return f


def _formula(x, ctx):
    if not isinstance(x, list):
        if x == "true":
            return TRUE
        if x == "false":
            return FALSE
        fail(f"expected a formula, found symbol {x!r}", x, ctx.source)
    if not x:
        fail("empty formula", x, ctx.source)
    head, args = x[0], x[1:]
    if isinstance(head, list):
        fail("formula head must be a symbol", head, ctx.source)
    if head == "and":
        return _nary(_and, args, ctx)
    if head == "or":
        return _nary(_or, args, ctx)
    if head == "not":
        _arity(x, 1, ctx)
        return Not(_formula(args[0], ctx))
    if head == "implies":
        _arity(x, 2, ctx)
        return Implies(_formula(args[0], ctx), _formula(args[1], ctx))
    if head in ("exists", "forall"):
        _arity(x, 2, ctx)
        vs = args[0]
        if not isinstance(vs, list) or any(isinstance(v, list) for v in vs):
            fail(f"{head} expects a variable list", vs, ctx.source)
        if ctx.sig is not None and any(v in ctx.sig.constants for v in vs):
            fail("cannot quantify over a constant", vs, ctx.source)
        body = _formula(args[1], ctx)
        vs = tuple(str(v) for v in vs)
        return (exists if head == "exists" else forall)(vs, body) if vs else body
    if head in ("=", "!="):
        _arity(x, 2, ctx)
        eq = Eq(ctx.term(args[0]), ctx.term(args[1]))
        return eq if head == "=" else Not(eq)
    name = str(head)
    if name.endswith(("*", "+")) and len(name) > 1:
        _arity(x, 2, ctx)
        kind = STAR if name.endswith("*") else PLUS
        return Closure(name[:-1], kind, ctx.term(args[0]), ctx.term(args[1]))
    return Atom(name, tuple(ctx.term(a) for a in args))


def _and(fs):
    return And(tuple(fs)) if len(fs) > 1 else (fs[0] if fs else TRUE)


def _or(fs):
    return Or(tuple(fs)) if len(fs) > 1 else (fs[0] if fs else FALSE)


def _nary(ctor, args, ctx):
    return ctor([_formula(a, ctx) for a in args])


def _arity(x, n, ctx):
    if len(x) - 1 != n:
        fail(f"{x[0]} expects {n} argument(s), got {len(x) - 1}", x, ctx.source)


def parse_formulas(text, sig=None, source=None):
    return [parse_formula(e, sig, source) for e in sexpr.loads_all(text, source)]

