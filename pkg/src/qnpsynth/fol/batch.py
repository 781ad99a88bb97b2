"""Vectorised evaluation of formulas over batches of structures.

A :class:`Batch` holds ``B`` structures over one universe ``0..n-1`` that share
the constant map. Every relation is a boolean array of shape
``(B,) + (n,) * arity``. Evaluating a formula produces a boolean array with one
axis per variable name; quantifiers reduce their axes. This is what makes the
exhaustive checks (all structures up to 4 objects, all bindings) feasible.

A packed batch stores ``uint64`` words instead of booleans: row ``w`` then
holds 64 structures at once, one per bit, and the same evaluator runs on it
with bitwise operations.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .structure import EvaluationError, Structure
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
    Implies,
    Not,
    Or,
    Signature,
    Top,
    Var,
    all_var_names,
    free_vars,
)

MAX_ENUM_BITS = 40


@dataclass
class Batch:
    objects: tuple
    relations: dict
    constants: dict
    size: int
    packed: bool = False
    _closures: dict = field(default_factory=dict, init=False, repr=False)

    @property
    def n(self):
        return len(self.objects)

    @classmethod
    def from_structures(cls, structures, arities):
        """Stack structures that share universe (in order) and constant map."""
        structures = list(structures)
        if not structures:
            raise ValueError("empty batch")
        first = structures[0]
        objects = first.universe
        index = {o: i for i, o in enumerate(objects)}
        consts = {c: index[o] for c, o in first.constant_map.items()}
        n, B = len(objects), len(structures)
        rels = {}
        for p, k in arities.items():
            arr = np.zeros((B,) + (n,) * k, dtype=bool)
            for b, st in enumerate(structures):
                for t in st.interpretation.get(p, ()):
                    arr[(b,) + tuple(index[o] for o in t)] = True
            rels[p] = arr
        for st in structures[1:]:
            if st.universe != objects or st.constant_map != first.constant_map:
                raise ValueError("structures in a batch must share universe and constants")
        return cls(objects, rels, consts, B)

    def structure(self, b, arities=None) -> Structure:
        """Materialise the ``b``-th structure of the batch."""
        interp = {}
        for p, arr in self.relations.items():
            interp[p] = {tuple(self.objects[i] for i in idx) for idx in np.argwhere(arr[b])}
        cmap = {c: self.objects[i] for c, i in self.constants.items()}
        ar = arities or {p: arr.ndim - 1 for p, arr in self.relations.items()}
        return Structure(self.objects, interp, cmap, ar)

    def select(self, mask):
        """Sub-batch of the structures where boolean ``mask`` is set."""
        if self.packed:
            raise ValueError("cannot select from a packed batch")
        rels = {p: arr[mask] for p, arr in self.relations.items()}
        return Batch(self.objects, rels, self.constants, int(np.count_nonzero(mask)))

    @property
    def dtype(self):
        return np.uint64 if self.packed else np.bool_

    def closure(self, pred, kind):
        key = (pred, kind)
        if key not in self._closures:
            rel = self.relations[pred]
            ones = ~np.zeros((), dtype=rel.dtype)
            eye = np.where(np.eye(self.n, dtype=bool), ones, np.zeros((), dtype=rel.dtype))
            star = rel | eye
            while True:
                nxt = _compose(star, star)
                if np.array_equal(nxt, star):
                    break
                star = nxt
            self._closures[(pred, STAR)] = star
            self._closures[(pred, PLUS)] = _compose(rel, star)
        return self._closures[key]


def _compose(r, s):
    """Relational composition, elementwise over the batch axis (bitwise for packed)."""
    return np.bitwise_or.reduce(r[..., :, :, None] & s[..., None, :, :], axis=-2)


class _Evaluator:
    def __init__(self, batch: Batch, axes):
        self.batch = batch
        self.axes = list(axes)
        self.m = len(self.axes)
        self.n = batch.n
        self.zero = np.zeros((), dtype=batch.dtype)
        self.ones = ~self.zero

    def _grid(self, name):
        shape = [1] * self.m
        shape[self.axes.index(name)] = self.n
        return np.arange(self.n).reshape(shape)

    def index(self, t, fixed):
        if isinstance(t, Const):
            try:
                return self.batch.constants[t.name]
            except KeyError:
                raise EvaluationError(f"unknown constant {t.name!r}") from None
        if t.name in fixed:
            return fixed[t.name]
        return self._grid(t.name)

    def _lookup(self, arr, args, fixed):
        idx = [self.index(t, fixed) for t in args]
        if all(isinstance(i, (int, np.integer)) for i in idx):
            out = arr[(slice(None),) + tuple(idx)]
            return out.reshape((out.shape[0],) + (1,) * self.m)
        idx = np.broadcast_arrays(*[np.asarray(i) for i in idx])
        out = arr[(slice(None),) + tuple(idx)]
        return out.reshape((out.shape[0],) + out.shape[1:])

    def _const(self, value):
        return np.full((1,) * (1 + self.m), self.ones if value else self.zero)

    def _from_bool(self, arr):
        if not self.batch.packed:
            return arr
        return np.where(arr, self.ones, self.zero)

    def ev(self, f, fixed):
        if isinstance(f, Top):
            return self._const(True)
        if isinstance(f, Bottom):
            return self._const(False)
        if isinstance(f, Atom):
            try:
                arr = self.batch.relations[f.pred]
            except KeyError:
                raise EvaluationError(f"unknown predicate {f.pred!r}") from None
            if not f.args:
                return arr.reshape((arr.shape[0],) + (1,) * self.m)
            return self._lookup(arr, f.args, fixed)
        if isinstance(f, Closure):
            if f.pred not in self.batch.relations:
                raise EvaluationError(f"unknown predicate {f.pred!r}")
            return self._lookup(self.batch.closure(f.pred, f.kind), (f.left, f.right), fixed)
        if isinstance(f, Eq):
            a, b = self.index(f.left, fixed), self.index(f.right, fixed)
            if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
                return self._const(a == b)
            eq = np.asarray(a) == np.asarray(b)
            return self._from_bool(eq.reshape((1,) + eq.shape))
        if isinstance(f, Not):
            return ~self.ev(f.arg, fixed)
        if isinstance(f, And):
            return functools.reduce(np.bitwise_and, (self.ev(a, fixed) for a in f.args))
        if isinstance(f, Or):
            return functools.reduce(np.bitwise_or, (self.ev(a, fixed) for a in f.args))
        if isinstance(f, Implies):
            return ~self.ev(f.left, fixed) | self.ev(f.right, fixed)
        if isinstance(f, (Exists, Forall)):
            inner = {k: v for k, v in fixed.items() if k not in f.vars}
            body = self.ev(f.body, inner)
            axes = tuple(1 + self.axes.index(v) for v in f.vars)
            red = np.bitwise_or if isinstance(f, Exists) else np.bitwise_and
            return red.reduce(body, axis=axes, keepdims=True)
        raise EvaluationError(f"not a formula: {f!r}")


def evaluate_batch(f, batch: Batch, free=(), fixed: Mapping[str, int] = None) -> np.ndarray:
    """Truth array of shape ``(B,) + (n,) * len(free)`` (words, if the batch is packed).

    ``fixed`` binds variables to object indices; remaining free variables of
    ``f`` must be listed in ``free`` (their axes appear in that order).
    """
    fixed = dict(fixed or {})
    free = tuple(v.name if isinstance(v, Var) else v for v in free)
    unbound = free_vars(f) - set(free) - set(fixed)
    if unbound:
        raise EvaluationError(f"unbound free variables: {sorted(unbound)}")
    fixed = {k: v for k, v in fixed.items() if k not in free}
    axes = sorted(all_var_names(f) | set(free))
    ev = _Evaluator(batch, axes)
    res = ev.ev(f, fixed)
    n = batch.n
    target = (batch.size,) + tuple(n if a in free else 1 for a in axes)
    res = np.broadcast_to(res, target)
    order = [0] + [1 + axes.index(v) for v in free]
    rest = [i for i in range(len(target)) if i not in order]
    res = res.transpose(order + rest)
    return res.reshape((batch.size,) + (n,) * len(free))


# -- enumeration of all structures -------------------------------------------


def object_names(constants, n):
    """Constants name their own objects; the rest get ``a, b, c, ...``."""
    names = list(constants)[:n]
    pool = (chr(c) for c in range(ord("a"), ord("z") + 1))
    while len(names) < n:
        cand = next(pool)
        if cand not in names:
            names.append(cand)
    return tuple(names)


def structure_count(sig: Signature, n: int, preds=None) -> int:
    preds = list(sig.predicates) if preds is None else list(preds)
    return 2 ** sum(n ** sig.predicates[p] for p in preds)


def enumerate_batches(sig: Signature, n: int, preds=None, chunk=4096):
    """Yield batches covering every interpretation of ``preds`` over ``n`` objects.

    Constants are interpreted injectively as objects ``0..c-1`` (unique names);
    every structure with distinct constants is isomorphic to one of these.
    Structure ``i`` sets bit ``j`` of ``i`` for the ``j``-th ground tuple, with
    tuples in predicate order then row-major order.
    """
    preds = list(sig.predicates) if preds is None else [p for p in sig.predicates if p in set(preds)]
    if len(sig.constants) > n:
        return
    arities = [sig.predicates[p] for p in preds]
    widths = [n**k for k in arities]
    total = sum(widths)
    if total > MAX_ENUM_BITS:
        raise OverflowError(f"{2**total} structures over {n} objects is beyond enumeration")
    count = 2**total
    objects = object_names(sig.constants, n)
    consts = {c: i for i, c in enumerate(sig.constants)}
    shifts = np.arange(total, dtype=np.int64)
    for lo in range(0, count, chunk):
        idx = np.arange(lo, min(count, lo + chunk), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(bool)
        rels, off = {}, 0
        for p, k, w in zip(preds, arities, widths):
            rels[p] = bits[:, off : off + w].reshape((len(idx),) + (n,) * k)
            off += w
        yield lo, Batch(objects, rels, consts, len(idx))


# patterns of the six lowest structure-index bits inside one 64-bit word
_LOW_PATTERNS = [
    np.uint64(sum(1 << i for i in range(64) if (i >> j) & 1)) for j in range(6)
]


def enumerate_packed(sig: Signature, n: int, preds=None, chunk=1 << 14):
    """Like :func:`enumerate_batches`, but 64 structures per ``uint64`` word.

    Yields ``(first_word, batch, valid)`` where ``valid`` is the word mask of
    structures that exist (only short of all-ones when there are under 64).
    Structure ``64 * w + i`` is bit ``i`` of word ``w``.
    """
    preds = list(sig.predicates) if preds is None else [p for p in sig.predicates if p in set(preds)]
    if len(sig.constants) > n:
        return
    arities = [sig.predicates[p] for p in preds]
    widths = [n**k for k in arities]
    total = sum(widths)
    if total > MAX_ENUM_BITS:
        raise OverflowError(f"{2**total} structures over {n} objects is beyond enumeration")
    objects = object_names(sig.constants, n)
    consts = {c: i for i, c in enumerate(sig.constants)}
    words = max(1, 2 ** (total - 6)) if total > 6 else 1
    valid = np.uint64((1 << (2**total)) - 1) if total < 6 else ~np.uint64(0)
    for lo in range(0, words, chunk):
        w = np.arange(lo, min(words, lo + chunk), dtype=np.int64)
        cols = []
        for j in range(total):
            if j < 6:
                cols.append(np.full(len(w), _LOW_PATTERNS[j], dtype=np.uint64))
            else:
                bit = ((w >> (j - 6)) & 1).astype(bool)
                cols.append(np.where(bit, ~np.uint64(0), np.uint64(0)))
        bits = np.stack(cols, axis=1) if cols else np.zeros((len(w), 0), dtype=np.uint64)
        rels, off = {}, 0
        for p, k, wd in zip(preds, arities, widths):
            rels[p] = bits[:, off : off + wd].reshape((len(w),) + (n,) * k)
            off += wd
        yield lo, Batch(objects, rels, consts, len(w), packed=True), valid


def structure_at(sig: Signature, n: int, preds, index) -> Structure:
    """The ``index``-th structure in the enumeration order of :func:`enumerate_batches`."""
    preds = [p for p in sig.predicates if p in set(preds)]
    objects = object_names(sig.constants, n)
    interp, j = {}, 0
    for p in preds:
        k = sig.predicates[p]
        ts = set()
        for pos in np.ndindex(*((n,) * k)):
            if (index >> j) & 1:
                ts.add(tuple(objects[i] for i in pos))
            j += 1
        interp[p] = ts
    cmap = {c: objects[i] for i, c in enumerate(sig.constants)}
    return Structure(objects, interp, cmap, {p: sig.predicates[p] for p in preds})
