"""Bases for synthesis: per-atom necessary (N) and sufficient (S) next-state conditions.

A base maps an action schema ``a(z)`` and an atom ``p(x)`` or ``p*(x, y)`` to
formulas over the current state such that, whenever ``a(o)`` is applied,

    S holds  =>  the atom holds afterwards  =>  N holds.

:class:`GeneralBase` implements the domain-independent base built from
bracket expressions; :class:`TrivialBase` is the uninformative one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .fol.syntax import (
    FALSE,
    PLUS,
    STAR,
    TRUE,
    Atom,
    Closure,
    Eq,
    Var,
    all_var_names,
    conj,
    disj,
    exists,
    forall,
    fresh_name,
    implies,
    rebuild,
    children,
    tuple_eq,
    tuple_neq,
)
from .strips import ActionSchema

N, S = "N", "S"
IN_POST = "in-post"
NEG_IN_POST = "neg-in-post"
NEG_NOT_IN_POST = "neg-not-in-post"


@dataclass(frozen=True)
class BracketExpr:
    """``[p(x) in Post]``, ``[~p(x) in Post]`` or ``[~p(x) not in Post]``."""

    polarity: str
    pred: str
    args: tuple

    def __post_init__(self):
        if self.polarity not in (IN_POST, NEG_IN_POST, NEG_NOT_IN_POST):
            raise InputError(f"unknown bracket polarity {self.polarity!r}")
        object.__setattr__(self, "args", tuple(self.args))


def bracket(expr: BracketExpr, a: ActionSchema):
    """Reduce a bracket expression to equalities over the schema parameters."""
    source = a.adds(expr.pred) if expr.polarity == IN_POST else a.deletes(expr.pred)
    for eff in source:
        if len(eff.args) != len(expr.args):
            raise InputError(f"{expr.pred}: arity mismatch in bracket expression for {a.name}")
    if expr.polarity == NEG_NOT_IN_POST:
        return conj(*(tuple_neq(expr.args, eff.args) for eff in source))
    return disj(*(tuple_eq(expr.args, eff.args) for eff in source))


def _check_x(x):
    if x not in (N, S):
        raise InputError(f"condition kind must be N or S, got {x!r}")


def base_atom(x, a: ActionSchema, pred, args):
    """``[p(x) in Post] | (p(x) & [~p(x) not in Post])``, the same for N and S."""
    _check_x(x)
    args = tuple(args)
    return disj(
        bracket(BracketExpr(IN_POST, pred, args), a),
        conj(Atom(pred, args), bracket(BracketExpr(NEG_NOT_IN_POST, pred, args), a)),
    )


def _fresh_pair(a, *terms):
    taken = set(a.params) | {t.name for t in terms if isinstance(t, Var)}
    u = fresh_name("u", taken)
    taken.add(u)
    v = fresh_name("v", taken)
    return Var(u), Var(v)


def base_star(x, a: ActionSchema, pred, left, right, amended=False, arity=2):
    """Condition for ``p*(left, right)`` after ``a``; ``arity`` guards non-binary ``p``."""
    _check_x(x)
    if arity != 2:
        raise InputError(f"closure of non-binary predicate {pred!r}")
    u, v = _fresh_pair(a, left, right)
    added = bracket(BracketExpr(IN_POST, pred, (u, v)), a)
    star = Closure(pred, STAR, left, right)
    if x == N:
        if len(a.adds(pred)) <= 1:
            via = conj(Closure(pred, STAR, left, u), Closure(pred, STAR, v, right))
        else:
            via = disj(Closure(pred, STAR, left, u), Closure(pred, STAR, v, right))
        return disj(star, exists((u.name, v.name), conj(added, via)))
    deleted = bracket(BracketExpr(NEG_IN_POST, pred, (u, v)), a)
    out = disj(
        Eq(left, right),
        conj(star, forall((u.name, v.name), implies(deleted, Eq(u, v)))),
    )
    if amended:
        keeps = bracket(BracketExpr(NEG_NOT_IN_POST, pred, (u, v)), a)
        via = conj(added, Closure(pred, STAR, left, u), Closure(pred, STAR, v, right))
        out = disj(out, conj(forall((u.name, v.name), keeps), exists((u.name, v.name), via)))
    return out


def eliminate_plus(f, avoid=()):
    """Rewrite every ``p+(s, t)`` as ``E w (p(s, w) & p*(w, t))`` with ``w`` fresh."""
    taken = set(avoid) | all_var_names(f)
    return _elim(f, taken)


def _elim(f, taken):
    if isinstance(f, Closure) and f.kind == PLUS:
        w = fresh_name("w", taken)
        taken.add(w)
        return exists((w,), conj(Atom(f.pred, (f.left, Var(w))), Closure(f.pred, STAR, Var(w), f.right)))
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, [_elim(k, taken) for k in kids])


class SynthesisBase:
    """Interface: ``condition(x, schema, atom)`` for ``x`` in ``{"N", "S"}``."""

    name = "base"

    def condition(self, x, a: ActionSchema, atom):
        raise NotImplementedError

    def describe(self):
        return self.name


class GeneralBase(SynthesisBase):
    """The domain-independent base; ``amended`` lists predicates whose p* S-condition
    also accepts paths created through a newly added edge when nothing is deleted."""

    name = "general"

    def __init__(self, amended=()):
        self.amended = frozenset(amended)

    def condition(self, x, a, atom):
        if isinstance(atom, Atom):
            return base_atom(x, a, atom.pred, atom.args)
        if isinstance(atom, Closure):
            if atom.kind != STAR:
                raise InputError(f"{atom.pred}+ must be eliminated before using the base")
            return base_star(x, a, atom.pred, atom.left, atom.right, atom.pred in self.amended)
        raise InputError(f"the base does not cover {atom!r}")

    def describe(self):
        if self.amended:
            return f"general (amended p* for {', '.join(sorted(self.amended))})"
        return "general"


class TrivialBase(SynthesisBase):
    """S = false and N = true for every atom: valid but uninformative."""

    name = "trivial"

    def condition(self, x, a, atom):
        _check_x(x)
        if not isinstance(atom, (Atom, Closure)):
            raise InputError(f"the base does not cover {atom!r}")
        return FALSE if x == S else TRUE


def make_base(kind="general", amended=()):
    if kind == "general":
        return GeneralBase(amended)
    if kind == "trivial":
        if amended:
            raise InputError("the trivial base takes no amended predicates")
        return TrivialBase()
    raise InputError(f"unknown base kind {kind!r}")
