"""Finite structures and the reference (recursive, Tarskian) evaluator.

This evaluator is deliberately plain: it is the oracle against which the
vectorised evaluator in :mod:`qnpsynth.fol.batch` is tested.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .syntax import (
    PLUS,
    STAR,
    And,
    Atom,
    Bottom,
    Closure,
    Const,
    Eq,
    Exists,
    Forall,
    FormulaError,
    Implies,
    Not,
    Or,
    Signature,
    Top,
    Var,
    free_vars,
)


class EvaluationError(FormulaError):
    """Unbound variable, unknown symbol, or ill-typed structure."""


@dataclass
class Structure:
    universe: tuple
    interpretation: Mapping[str, frozenset]
    constant_map: Mapping[str, object] = field(default_factory=dict)
    arities: Mapping[str, int] = None
    _closures: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.universe = tuple(self.universe)
        self.interpretation = {p: frozenset(map(tuple, ts)) for p, ts in self.interpretation.items()}
        self.constant_map = dict(self.constant_map)
        if self.arities is None:
            self.arities = {}
            for p, ts in self.interpretation.items():
                lens = {len(t) for t in ts}
                if len(lens) > 1:
                    raise EvaluationError(f"mixed tuple lengths for predicate {p!r}")
                if lens:
                    self.arities[p] = lens.pop()
        else:
            self.arities = dict(self.arities)
            for p in self.arities:
                self.interpretation.setdefault(p, frozenset())
        objs = set(self.universe)
        for p, ts in self.interpretation.items():
            k = self.arities.get(p)
            for t in ts:
                if k is not None and len(t) != k:
                    raise EvaluationError(f"tuple {t} does not match arity {k} of {p!r}")
                if not objs.issuperset(t):
                    raise EvaluationError(f"tuple {t} of {p!r} leaves the universe")
        for c, o in self.constant_map.items():
            if o not in objs:
                raise EvaluationError(f"constant {c!r} denotes {o!r}, not in the universe")

    @classmethod
    def from_atoms(cls, universe, atoms, sig: Signature, constant_map=None):
        """Build from ground atoms ``(pred, arg, ...)``; constants denote themselves by default."""
        interp = {p: set() for p in sig.predicates}
        for a in atoms:
            interp[a[0]].add(tuple(a[1:]))
        if constant_map is None:
            constant_map = {c: c for c in sig.constants}
        return cls(tuple(universe), interp, constant_map, dict(sig.predicates))

    def relation(self, pred):
        try:
            return self.interpretation[pred]
        except KeyError:
            raise EvaluationError(f"unknown predicate {pred!r}") from None

    def atoms(self):
        return sorted((p, *t) for p, ts in self.interpretation.items() for t in ts)


def closure(st: Structure, pred, kind=STAR) -> frozenset:
    """Transitive (``plus``) or reflexive-transitive (``star``) closure of a binary relation."""
    key = (pred, kind)
    if key in st._closures:
        return st._closures[key]
    rel = st.relation(pred)
    if st.arities.get(pred, 2) != 2:
        raise EvaluationError(f"closure of non-binary predicate {pred!r}")
    succ = {u: set() for u in st.universe}
    for u, v in rel:
        succ[u].add(v)
    plus = set()
    for u in st.universe:
        seen, todo = set(), list(succ[u])
        while todo:
            w = todo.pop()
            if w not in seen:
                seen.add(w)
                todo.extend(succ[w])
        plus.update((u, w) for w in seen)
    st._closures[(pred, PLUS)] = frozenset(plus)
    st._closures[(pred, STAR)] = frozenset(plus | {(u, u) for u in st.universe})
    return st._closures[key]


def _value(t, st, binding):
    if isinstance(t, Var):
        try:
            return binding[t.name]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name!r}") from None
    if isinstance(t, Const):
        try:
            return st.constant_map[t.name]
        except KeyError:
            raise EvaluationError(f"unknown constant {t.name!r}") from None
    raise EvaluationError(f"not a term: {t!r}")


def evaluate(f, st: Structure, binding: Mapping[str, object] = None) -> bool:
    binding = dict(binding or {})
    missing = free_vars(f) - set(binding)
    if missing:
        raise EvaluationError(f"unbound free variables: {sorted(missing)}")
    return _eval(f, st, binding)


def _eval(f, st, b):
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return tuple(_value(t, st, b) for t in f.args) in st.relation(f.pred)
    if isinstance(f, Closure):
        return (_value(f.left, st, b), _value(f.right, st, b)) in closure(st, f.pred, f.kind)
    if isinstance(f, Eq):
        return _value(f.left, st, b) == _value(f.right, st, b)
    if isinstance(f, Not):
        return not _eval(f.arg, st, b)
    if isinstance(f, And):
        return all(_eval(a, st, b) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(a, st, b) for a in f.args)
    if isinstance(f, Implies):
        return (not _eval(f.left, st, b)) or _eval(f.right, st, b)
    if isinstance(f, (Exists, Forall)):
        test = any if isinstance(f, Exists) else all
        return test(
            _eval(f.body, st, {**b, **dict(zip(f.vars, objs))})
            for objs in itertools.product(st.universe, repeat=len(f.vars))
        )
    raise EvaluationError(f"not a formula: {f!r}")


def extension(concept, free: tuple, st: Structure) -> frozenset:
    """``{u : st |= concept(u)}`` over tuples for the variables ``free``."""
    free = tuple(v.name if isinstance(v, Var) else v for v in free)
    extra = free_vars(concept) - set(free)
    if extra:
        raise EvaluationError(f"concept has free variables outside {free}: {sorted(extra)}")
    return frozenset(
        objs
        for objs in itertools.product(st.universe, repeat=len(free))
        if _eval(concept, st, dict(zip(free, objs)))
    )
