"""Best-effort, equivalence-preserving simplification.

The pipeline is: negation normal form with single-variable quantifiers, a
bottom-up rewrite pass iterated to a fixpoint, then a cosmetic pass that
reintroduces implications under universal quantifiers and tuple
inequalities. Constants follow the unique-names assumption, so ``A = B``
for distinct constants folds to false. All structures are non-empty, so
vacuous quantifiers are dropped.

Results are not canonical; compare them semantically, never textually.
"""

from __future__ import annotations

from .syntax import (
    FALSE,
    STAR,
    TRUE,
    And,
    Atom,
    Bottom,
    Closure,
    Const,
    Eq,
    Exists,
    Forall,
    Implies,
    Not,
    Or,
    Top,
    Var,
    conj,
    disj,
    free_vars,
    neg,
    substitute,
)

MAX_PASSES = 64


def simplify(f, pretty=True):
    g = nnf(f)
    for _ in range(MAX_PASSES):
        h = _step(g)
        if h == g:
            break
        g = h
    return prettify(g) if pretty else g


# -- negation normal form -----------------------------------------------------


def is_literal(f):
    if isinstance(f, Not):
        f = f.arg
    return isinstance(f, (Atom, Closure, Eq))


def nnf(f, positive=True):
    if isinstance(f, Top):
        return TRUE if positive else FALSE
    if isinstance(f, Bottom):
        return FALSE if positive else TRUE
    if isinstance(f, (Atom, Closure, Eq)):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return nnf(f.arg, not positive)
    if isinstance(f, And):
        parts = [nnf(a, positive) for a in f.args]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(f, Or):
        parts = [nnf(a, positive) for a in f.args]
        return disj(*parts) if positive else conj(*parts)
    if isinstance(f, Implies):
        if positive:
            return disj(nnf(f.left, False), nnf(f.right, True))
        return conj(nnf(f.left, True), nnf(f.right, False))
    if isinstance(f, (Exists, Forall)):
        body = nnf(f.body, positive)
        q = Exists if isinstance(f, Exists) == positive else Forall
        for v in reversed(f.vars):
            body = q((v,), body)
        return body
    raise TypeError(f"not a formula: {f!r}")


# -- rewrite pass ---------------------------------------------------------------


def _term_key(t):
    return (isinstance(t, Const), t.name)


def _eq(a, b):
    if a == b:
        return TRUE
    if isinstance(a, Const) and isinstance(b, Const):
        return FALSE
    if _term_key(b) < _term_key(a):
        a, b = b, a
    return Eq(a, b)


def _complement(f):
    return f.arg if isinstance(f, Not) else Not(f)


def _step(f):
    if isinstance(f, Eq):
        return _eq(f.left, f.right)
    if isinstance(f, Closure):
        if f.kind == STAR and f.left == f.right:
            return TRUE
        return f
    if isinstance(f, Not):
        return neg(_step(f.arg))
    if isinstance(f, And):
        return _junction(And, [_step(a) for a in f.args])
    if isinstance(f, Or):
        return _junction(Or, [_step(a) for a in f.args])
    if isinstance(f, Exists):
        return _quant(Exists, f.vars[0], _step(f.body)) if len(f.vars) == 1 else _step(nnf(f))
    if isinstance(f, Forall):
        return _quant(Forall, f.vars[0], _step(f.body)) if len(f.vars) == 1 else _step(nnf(f))
    if isinstance(f, Implies):
        return _step(nnf(f))
    return f


def _junction(cls, parts):
    """Simplify a conjunction (``cls`` is And) or disjunction (Or)."""
    build = conj if cls is And else disj
    g = build(*parts)
    if not isinstance(g, cls):
        return g
    parts = list(g.args)
    dual = Or if cls is And else And
    # complementary literals
    lits = {p for p in parts if is_literal(p)}
    if any(_complement(p) in lits for p in lits):
        return FALSE if cls is And else TRUE
    # absorption and unit simplification against sibling literals
    new = []
    for p in parts:
        if isinstance(p, dual):
            if any(q in lits for q in p.args):
                continue
            kept = [q for q in p.args if _complement(q) not in lits]
            p = (disj if cls is And else conj)(*kept)
        new.append(p)
    g = build(*new)
    if not isinstance(g, cls):
        return g
    return _propagate_equalities(cls, list(g.args))


def _propagate_equalities(cls, parts):
    # x=t & phi(x)  ==  x=t & phi(t);  dually  x!=t | phi(x)  ==  x!=t | phi(t)
    build = conj if cls is And else disj
    for p in parts:
        eq = p if cls is And else (p.arg if isinstance(p, Not) else None)
        if not isinstance(eq, Eq):
            continue
        a, b = _orient(eq)
        if b is None:
            continue
        others = [q for q in parts if q is not p]
        if not any(b.name in free_vars(q) for q in others):
            continue
        return build(p, *(substitute(q, {b.name: a}) for q in others))
    return build(*parts)


def _orient(eq):
    """(replacement, replaced variable) for an equality, preferring constants."""
    a, b = eq.left, eq.right
    if isinstance(a, Const) and isinstance(b, Const):
        return a, None
    if isinstance(b, Const) or (isinstance(a, Var) and isinstance(b, Var) and b.name < a.name):
        a, b = b, a
    return a, b


def _quant(cls, v, body):
    if v not in free_vars(body):
        return body
    inner, outer = (And, Or) if cls is Exists else (Or, And)
    # one-point rule
    if cls is Exists and isinstance(body, Eq):
        return TRUE
    if cls is Forall and isinstance(body, Not) and isinstance(body.arg, Eq):
        return FALSE
    if isinstance(body, inner):
        for p in body.args:
            eq = p if cls is Exists else (p.arg if isinstance(p, Not) else None)
            if isinstance(eq, Eq):
                t = _other_side(eq, v)
                if t is not None:
                    rest = [q for q in body.args if q is not p]
                    return (conj if cls is Exists else disj)(*(substitute(q, {v: t}) for q in rest))
        # miniscoping: pull out parts not mentioning v
        free_parts = [p for p in body.args if v not in free_vars(p)]
        if free_parts:
            bound_parts = [p for p in body.args if v in free_vars(p)]
            build = conj if cls is Exists else disj
            return build(*free_parts, cls((v,), build(*bound_parts)))
    if isinstance(body, outer):
        build = disj if cls is Exists else conj
        return build(*(_quant(cls, v, p) for p in body.args))
    return cls((v,), body)


def _other_side(eq, v):
    if isinstance(eq.left, Var) and eq.left.name == v and eq.right != eq.left:
        other = eq.right
    elif isinstance(eq.right, Var) and eq.right.name == v and eq.left != eq.right:
        other = eq.left
    else:
        return None
    return other


# -- cosmetic pass ----------------------------------------------------------------


def prettify(f):
    """Merge quantifier blocks, write ``~(x=a & y=b)`` and ``A v(p & q => r)``."""
    if isinstance(f, (Exists, Forall)):
        vs, body = list(f.vars), f.body
        while isinstance(body, type(f)):
            vs.extend(body.vars)
            body = body.body
        body = prettify(body)
        if isinstance(f, Forall) and isinstance(body, Or):
            body = _as_implication(body)
        return type(f)(tuple(vs), body)
    if isinstance(f, Or):
        args = [prettify(a) for a in f.args]
        if len(args) > 1 and all(isinstance(a, Not) and isinstance(a.arg, Eq) for a in args):
            return Not(And(tuple(a.arg for a in args)))
        return Or(tuple(args))
    if isinstance(f, And):
        return And(tuple(prettify(a) for a in f.args))
    if isinstance(f, Not):
        return Not(prettify(f.arg))
    if isinstance(f, Implies):
        return Implies(prettify(f.left), prettify(f.right))
    return f


def _as_implication(body):
    negs = [a for a in body.args if isinstance(a, Not) and isinstance(a.arg, (Atom, Closure))]
    rest = [a for a in body.args if a not in negs]
    if not negs or not rest:
        return body
    if len(rest) > 1 and all(isinstance(a, Not) and isinstance(a.arg, Eq) for a in rest):
        concl = Not(And(tuple(a.arg for a in rest)))
    elif len(rest) == 1 and isinstance(rest[0], Not) and isinstance(rest[0].arg, And):
        concl = rest[0]
    else:
        concl = rest[0] if len(rest) == 1 else Or(tuple(rest))
    ante = negs[0].arg if len(negs) == 1 else And(tuple(a.arg for a in negs))
    return Implies(ante, concl)
