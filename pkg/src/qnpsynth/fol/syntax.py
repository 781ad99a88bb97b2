"""Formula AST over a planning-domain signature.

Terms are :class:`Var` or :class:`Const`. Formulas are immutable, hashable
dataclasses so they can be deduplicated and used as cache keys. The helper
constructors (:func:`conj`, :func:`disj`, :func:`neg`, ...) do light
constant folding; the node constructors themselves never rewrite anything.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

PLUS = "plus"
STAR = "star"


class FormulaError(ValueError):
    """Ill-formed formula or formula/signature mismatch."""


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)

    def __str__(self):
        from .printer import to_infix

        return to_infix(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple


@dataclass(frozen=True)
class Closure(Formula):
    """``p+(left, right)`` or ``p*(left, right)``."""

    pred: str
    kind: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.kind not in (PLUS, STAR):
            raise FormulaError(f"unknown closure kind {self.kind!r}")


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple
    body: Formula


Quantifier = (Exists, Forall)


@dataclass(frozen=True)
class Signature:
    """Constants, predicates with arities, and closure-enabled binary predicates.

    ``closure_enabled`` defaults to every binary predicate.
    """

    constants: tuple = ()
    predicates: Mapping[str, int] = field(default_factory=dict)
    closure_enabled: frozenset = None

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(self.constants))
        object.__setattr__(self, "predicates", dict(self.predicates))
        if len(set(self.constants)) != len(self.constants):
            raise FormulaError("duplicate constant names")
        clash = set(self.constants) & set(self.predicates)
        if clash:
            raise FormulaError(f"names used as both constant and predicate: {sorted(clash)}")
        binary = {p for p, k in self.predicates.items() if k == 2}
        if self.closure_enabled is None:
            object.__setattr__(self, "closure_enabled", frozenset(binary))
        else:
            enabled = frozenset(self.closure_enabled)
            bad = enabled - binary
            if bad:
                raise FormulaError(f"closures only exist for binary predicates, got {sorted(bad)}")
            object.__setattr__(self, "closure_enabled", enabled)

    def __hash__(self):
        return hash((self.constants, tuple(sorted(self.predicates.items())), self.closure_enabled))

    def arity(self, pred):
        try:
            return self.predicates[pred]
        except KeyError:
            raise FormulaError(f"unknown predicate {pred!r}") from None

    def restrict(self, preds):
        """Sub-signature with the same constants and only ``preds``."""
        preds = [p for p in self.predicates if p in set(preds)]
        return Signature(
            self.constants,
            {p: self.predicates[p] for p in preds},
            frozenset(p for p in self.closure_enabled if p in preds),
        )


# -- constructors -----------------------------------------------------------


def conj(*args):
    """Conjunction with flattening and unit/zero folding."""
    out = []
    for a in _flatten(args, And):
        if isinstance(a, Bottom):
            return FALSE
        if isinstance(a, Top) or a in out:
            continue
        out.append(a)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*args):
    out = []
    for a in _flatten(args, Or):
        if isinstance(a, Top):
            return TRUE
        if isinstance(a, Bottom) or a in out:
            continue
        out.append(a)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def _flatten(args, cls):
    for a in args:
        if isinstance(a, (list, tuple)):
            yield from _flatten(a, cls)
        elif isinstance(a, cls):
            yield from a.args
        else:
            yield a


def neg(f):
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(a, b):
    if isinstance(a, Bottom) or isinstance(b, Top):
        return TRUE
    if isinstance(a, Top):
        return b
    return Implies(a, b)


def exists(vs, body):
    vs = _var_names(vs)
    if not vs or isinstance(body, (Top, Bottom)):
        return body
    return Exists(vs, body)


def forall(vs, body):
    vs = _var_names(vs)
    if not vs or isinstance(body, (Top, Bottom)):
        return body
    return Forall(vs, body)


def _var_names(vs):
    if isinstance(vs, (str, Var)):
        vs = (vs,)
    return tuple(v.name if isinstance(v, Var) else v for v in vs)


def tuple_eq(xs, ys):
    """``x1=y1 & ... & xn=yn``."""
    if len(xs) != len(ys):
        raise FormulaError("tuple equality between tuples of different length")
    return conj(*(Eq(a, b) for a, b in zip(xs, ys)))


def tuple_neq(xs, ys):
    """Tuple inequality ``(x1..xn) != (y1..yn)``, i.e. ``~(x1=y1 & ... & xn=yn)``."""
    return neg(tuple_eq(xs, ys))


def term(name_or_term, constants=()):
    if isinstance(name_or_term, (Var, Const)):
        return name_or_term
    return Const(name_or_term) if name_or_term in constants else Var(name_or_term)


# -- traversal --------------------------------------------------------------


def children(f) -> tuple:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Implies):
        return (f.left, f.right)
    if isinstance(f, Quantifier):
        return (f.body,)
    return ()


def terms_of(f) -> tuple:
    if isinstance(f, Atom):
        return f.args
    if isinstance(f, (Closure, Eq)):
        return (f.left, f.right)
    return ()


def free_vars(f) -> frozenset:
    """Names of the free variables of ``f``."""
    if isinstance(f, Quantifier):
        return free_vars(f.body) - set(f.vars)
    own = {t.name for t in terms_of(f) if isinstance(t, Var)}
    for c in children(f):
        own |= free_vars(c)
    return frozenset(own)


def all_var_names(f) -> set:
    """Every variable name occurring in ``f``, free or bound."""
    names = {t.name for t in terms_of(f) if isinstance(t, Var)}
    if isinstance(f, Quantifier):
        names.update(f.vars)
    for c in children(f):
        names |= all_var_names(c)
    return names


def subformulas(f) -> Iterator[Formula]:
    """Pre-order walk over ``f`` and all its subformulas."""
    yield f
    for c in children(f):
        yield from subformulas(c)


def predicates_used(f) -> set:
    return {g.pred for g in subformulas(f) if isinstance(g, (Atom, Closure))}


def constants_used(f) -> set:
    out = set()
    for g in subformulas(f):
        out.update(t.name for t in terms_of(g) if isinstance(t, Const))
    return out


def size(f) -> int:
    return sum(1 for _ in subformulas(f))


def rebuild(f, kids):
    """Same node type as ``f`` with new children (uses folding constructors)."""
    if isinstance(f, And):
        return conj(*kids)
    if isinstance(f, Or):
        return disj(*kids)
    if isinstance(f, Not):
        return neg(kids[0])
    if isinstance(f, Implies):
        return implies(*kids)
    if isinstance(f, Exists):
        return exists(f.vars, kids[0])
    if isinstance(f, Forall):
        return forall(f.vars, kids[0])
    return f


# -- substitution -----------------------------------------------------------


def fresh_name(base, taken) -> str:
    if base not in taken:
        return base
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in taken:
            return cand


def substitute(f, mapping: Mapping[str, Term]):
    """Capture-avoiding substitution of free variables by terms."""
    mapping = {k: v for k, v in mapping.items() if not (isinstance(v, Var) and v.name == k)}
    if not mapping:
        return f
    return _subst(f, mapping)


def _subst_term(t, mapping):
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    return t


def _subst(f, mapping):
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_subst_term(t, mapping) for t in f.args))
    if isinstance(f, Closure):
        return Closure(f.pred, f.kind, _subst_term(f.left, mapping), _subst_term(f.right, mapping))
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, mapping), _subst_term(f.right, mapping))
    if isinstance(f, Quantifier):
        inner = {k: v for k, v in mapping.items() if k not in f.vars}
        inner = {k: v for k, v in inner.items() if k in free_vars(f.body)}
        if not inner:
            return f
        incoming = {t.name for t in inner.values() if isinstance(t, Var)}
        taken = incoming | all_var_names(f.body) | set(inner)
        new_vars = []
        renames = {}
        for v in f.vars:
            if v in incoming:
                nv = fresh_name(v, taken)
                taken.add(nv)
                renames[v] = Var(nv)
                new_vars.append(nv)
            else:
                new_vars.append(v)
        body = _subst(f.body, renames) if renames else f.body
        return type(f)(tuple(new_vars), _subst(body, inner))
    kids = children(f)
    if not kids:
        return f
    return type(f)(*_ctor_args(f, [_subst(k, mapping) for k in kids]))


def _ctor_args(f, kids):
    if isinstance(f, (And, Or)):
        return (tuple(kids),)
    return tuple(kids)


def rename_apart(f, avoid: Iterable[str]):
    """Rename bound variables of ``f`` that clash with names in ``avoid``."""
    avoid = set(avoid)
    if not avoid:
        return f
    return _rename_apart(f, avoid, set(avoid) | all_var_names(f))


def _rename_apart(f, avoid, taken):
    if isinstance(f, Quantifier):
        renames = {}
        new_vars = []
        for v in f.vars:
            if v in avoid:
                nv = fresh_name(v, taken)
                taken.add(nv)
                renames[v] = Var(nv)
                new_vars.append(nv)
            else:
                new_vars.append(v)
        body = substitute(f.body, renames) if renames else f.body
        return type(f)(tuple(new_vars), _rename_apart(body, avoid, taken))
    kids = children(f)
    if not kids:
        return f
    return type(f)(*_ctor_args(f, [_rename_apart(k, avoid, taken) for k in kids]))


def check_formula(f, sig: Signature):
    """Raise :class:`FormulaError` unless ``f`` is well-formed over ``sig``."""
    for g in subformulas(f):
        if isinstance(g, Atom):
            if sig.arity(g.pred) != len(g.args):
                raise FormulaError(
                    f"{g.pred} has arity {sig.arity(g.pred)}, used with {len(g.args)} arguments"
                )
        elif isinstance(g, Closure):
            if g.pred not in sig.closure_enabled:
                raise FormulaError(f"no closure symbols for predicate {g.pred!r}")
        for t in terms_of(g):
            if isinstance(t, Const) and t.name not in sig.constants:
                raise FormulaError(f"unknown constant {t.name!r}")
