"""Features, abstract actions, and the relations tying them to ground instances.

Each check comes in two flavours: a per-state version built on the recursive
evaluator (easy to read, used as the reference) and a vectorised version
over :class:`~qnpsynth.fol.batch.Batch` used by the exhaustive verifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .fol.batch import Batch, evaluate_batch
from .fol.structure import extension
from .fol.syntax import TRUE, conj, exists, forall, free_vars, neg
from .strips import (
    DEFAULT_MAX_STATES,
    GroundAction,
    Instance,
    all_states,
    applicable,
    reachable,
    res,
    state_str,
    to_batch,
    to_structure,
)
from .verdict import Verdict

BOOLEAN = "boolean"
NUMERICAL = "numerical"
EFFECT_KINDS = ("inc", "dec", "true", "false")
CHANGE_KINDS = ("inc", "dec", "eq", "true", "false")


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str
    vars: tuple
    formula: object

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.kind not in (BOOLEAN, NUMERICAL):
            raise InputError(f"feature {self.name}: kind must be boolean or numerical")
        extra = free_vars(self.formula) - set(self.vars)
        if extra:
            raise InputError(f"feature {self.name}: free variables {sorted(extra)} not in {self.vars}")
        if len(set(self.vars)) != len(self.vars):
            raise InputError(f"feature {self.name}: repeated concept variables")

    @property
    def numerical(self):
        return self.kind == NUMERICAL

    def value(self, count):
        """Feature value from the extension size: a count, or non-emptiness."""
        return count if self.numerical else count > 0


@dataclass(frozen=True)
class Literal:
    """``f`` / ``~f`` for boolean features, ``n>0`` / ``n=0`` for numerical ones."""

    feature: str
    positive: bool
    numeric: bool = False

    def __str__(self):
        if self.numeric:
            return f"{self.feature}{'>0' if self.positive else '=0'}"
        return self.feature if self.positive else f"~{self.feature}"

    def to_sexpr(self):
        if self.numeric:
            return f"({'gt' if self.positive else 'eqz'} {self.feature})"
        return f"({'true' if self.positive else 'false'} {self.feature})"


@dataclass(frozen=True)
class Effect:
    feature: str
    kind: str

    def __post_init__(self):
        if self.kind not in EFFECT_KINDS:
            raise InputError(f"unknown effect kind {self.kind!r}")

    def __str__(self):
        return {
            "inc": f"{self.feature}+",
            "dec": f"{self.feature}-",
            "true": self.feature,
            "false": f"~{self.feature}",
        }[self.kind]

    def to_sexpr(self):
        return f"({self.kind} {self.feature})"


@dataclass(frozen=True)
class AbstractAction:
    name: str
    pre: tuple = ()
    eff: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pre", tuple(self.pre))
        object.__setattr__(self, "eff", tuple(self.eff))
        seen = {}
        for lit in self.pre:
            if seen.setdefault(lit.feature, lit.positive) != lit.positive:
                raise InputError(f"{self.name}: inconsistent preconditions on {lit.feature}")
        seen = {}
        for e in self.eff:
            if seen.setdefault(e.feature, e.kind) != e.kind:
                raise InputError(f"{self.name}: inconsistent effects on {e.feature}")

    def pre_on(self, feature):
        for lit in self.pre:
            if lit.feature == feature:
                return lit
        return None

    def effect_on(self, feature):
        for e in self.eff:
            if e.feature == feature:
                return e.kind
        return None

    def __str__(self):
        pre = ", ".join(map(str, self.pre))
        eff = ", ".join(map(str, self.eff))
        return f"{self.name} = <{pre}; {eff}>"


@dataclass(frozen=True)
class AbstractState:
    """Boolean valuation of the features; counts are kept for reporting only."""

    values: tuple
    counts: tuple = field(default=(), compare=False)

    def as_dict(self):
        return dict(self.values)

    def holds(self, lit: Literal):
        return dict(self.values)[lit.feature] == lit.positive

    def literals(self, features):
        vals = dict(self.values)
        return [Literal(f.name, vals[f.name], f.numerical) for f in features]

    def describe(self, features):
        return "{" + ", ".join(map(str, self.literals(features))) + "}"


@dataclass(frozen=True)
class Abstraction:
    features: tuple
    actions: tuple
    init: tuple = ()
    goal: tuple = ()
    name: str = "abstraction"

    def __post_init__(self):
        for attr in ("features", "actions", "init", "goal"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise InputError("duplicate feature names")
        anames = [a.name for a in self.actions]
        if len(set(anames)) != len(anames):
            raise InputError("duplicate abstract action names")
        for where, lits in [("init", self.init), ("goal", self.goal)] + [
            (a.name, a.pre) for a in self.actions
        ]:
            for lit in lits:
                self._check_literal(lit, where)
        for a in self.actions:
            for e in a.eff:
                f = self.feature(e.feature)
                if f.numerical != (e.kind in ("inc", "dec")):
                    raise InputError(f"{a.name}: effect {e} does not match the kind of {f.name}")
        for where, lits in (("init", self.init), ("goal", self.goal)):
            vals = {}
            for lit in lits:
                if vals.setdefault(lit.feature, lit.positive) != lit.positive:
                    raise InputError(f"{where} literals are inconsistent on {lit.feature}")
        if self.init and {lit.feature for lit in self.init} != set(names):
            raise InputError("init literals must assign every feature exactly once")

    def _check_literal(self, lit, where):
        f = self.feature(lit.feature)
        if f.numerical != lit.numeric:
            raise InputError(f"{where}: literal {lit} does not match the kind of {f.name}")

    def feature(self, name) -> Feature:
        for f in self.features:
            if f.name == name:
                return f
        raise InputError(f"unknown feature {name!r}")

    def action(self, name) -> AbstractAction:
        if isinstance(name, AbstractAction):
            return name
        for a in self.actions:
            if a.name == name:
                return a
        raise InputError(f"unknown abstract action {name!r}")


@dataclass(frozen=True)
class Policy:
    """Ordered rules ``(literals, action)``; the first matching rule wins."""

    rules: tuple

    def choose(self, state: AbstractState):
        for lits, action in self.rules:
            if all(state.holds(lit) for lit in lits):
                return action
        return None


# -- valuations -----------------------------------------------------------------


def feature_count(feature: Feature, inst: Instance, s) -> int:
    return len(extension(feature.formula, feature.vars, to_structure(inst, s)))


def valuation(features, inst: Instance, s) -> AbstractState:
    counts = [(f.name, feature_count(f, inst, s)) for f in features]
    return AbstractState(tuple((f.name, c > 0) for f, (_, c) in zip(features, counts)), tuple(counts))


def consistent(state: AbstractState, lits) -> bool:
    return all(state.holds(lit) for lit in lits)


def abstract_applicable(action: AbstractAction, v: AbstractState) -> bool:
    return consistent(v, action.pre)


class FeatureTable:
    """Vectorised feature extensions and counts over batches of instance states."""

    def __init__(self, features, inst: Instance):
        self.features = tuple(features)
        self.inst = inst

    def extensions(self, batch: Batch):
        return {f.name: evaluate_batch(f.formula, batch, f.vars) for f in self.features}

    def counts(self, batch: Batch, extensions=None):
        ext = extensions or self.extensions(batch)
        return {k: v.reshape(batch.size, -1).sum(axis=1) for k, v in ext.items()}

    def literal_mask(self, lits, counts, size):
        mask = np.ones(size, dtype=bool)
        for lit in lits:
            mask &= (counts[lit.feature] > 0) == lit.positive
        return mask


# codes returned by :func:`represent_codes`
YES, FAIL_PRE, FAIL_A, FAIL_B, FAIL_C = 0, 1, 2, 3, 4
CLAUSE_NAMES = {YES: None, FAIL_PRE: "pre", FAIL_A: "a", FAIL_B: "b", FAIL_C: "c"}


def _effect_ok(kind, before, after, numerical):
    """Vectorised check of one feature's transition against an effect (or none)."""
    if numerical:
        dec_ok = (after < before) == (kind == "dec")
        inc_ok = (after > before) == (kind == "inc")
        return dec_ok & inc_ok, None
    flipped = (before > 0) != (after > 0)
    if kind is None:
        return None, ~flipped
    return (after > 0) == (kind == "true"), None


def represent_codes(action: AbstractAction, features, before, after, app_mask):
    """Per-state clause codes for ``action`` against one ground action.

    ``before``/``after`` map feature names to count arrays in the state and in
    its successor; ``app_mask`` marks states where the ground action applies.
    """
    size = len(app_mask)
    codes = np.zeros(size, dtype=np.int8)
    pre = app_mask.copy()
    for lit in action.pre:
        pre &= (before[lit.feature] > 0) == lit.positive
    bad_a = np.zeros(size, dtype=bool)
    bad_b = np.zeros(size, dtype=bool)
    bad_c = np.zeros(size, dtype=bool)
    for f in features:
        kind = action.effect_on(f.name)
        b, a = before[f.name], after[f.name]
        if f.numerical:
            ok, _ = _effect_ok(kind, b, a, True)
            bad_c |= ~ok
        else:
            ok, no_flip = _effect_ok(kind, b, a, False)
            if kind is None:
                bad_a |= ~no_flip
            else:
                bad_b |= ~ok
    codes[bad_c] = FAIL_C
    codes[bad_b] = FAIL_B
    codes[bad_a] = FAIL_A
    codes[~pre] = FAIL_PRE
    return codes


@dataclass
class Represents:
    ok: bool
    clause: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def represents(q: Abstraction, action, ga: GroundAction, inst: Instance, s) -> Represents:
    """Does ground action ``ga`` instantiate abstract ``action`` in state ``s``?"""
    action = q.action(action)
    v = valuation(q.features, inst, s)
    if not applicable(s, ga):
        return Represents(False, "pre", f"{ga} is not applicable")
    if not abstract_applicable(action, v):
        return Represents(False, "pre", f"{action.name} is not applicable in {v.describe(q.features)}")
    t = res(s, ga)
    before, after = dict(v.counts), dict(valuation(q.features, inst, t).counts)
    for f in q.features:
        kind = action.effect_on(f.name)
        if f.numerical:
            continue
        flipped = (before[f.name] > 0) != (after[f.name] > 0)
        if kind is None and flipped:
            return Represents(False, "a", f"{f.name} flips but {action.name} has no effect on it")
    for f in q.features:
        kind = action.effect_on(f.name)
        if not f.numerical and kind is not None and (after[f.name] > 0) != (kind == "true"):
            return Represents(False, "b", f"effect {Effect(f.name, kind)} does not hold after {ga}")
    for f in q.features:
        if not f.numerical:
            continue
        kind = action.effect_on(f.name)
        b, a = before[f.name], after[f.name]
        if (a < b) != (kind == "dec") or (a > b) != (kind == "inc"):
            want = {"dec": "decrease", "inc": "increase", None: "stay"}[kind]
            return Represents(False, "c", f"{f.name} goes {b} -> {a} but should {want}")
    return Represents(True)


# -- compliance and monotonicity ------------------------------------------------------


def scope_states(inst: Instance, scope="reachable", max_states=DEFAULT_MAX_STATES, all_different=False):
    if scope == "reachable":
        return reachable(inst, max_states, all_different=all_different).states
    if scope == "all-states":
        return list(all_states(inst, max_states))
    raise InputError(f"unknown scope {scope!r}")


def complies(q: Abstraction, inst: Instance, scope="reachable", max_states=DEFAULT_MAX_STATES, states=None):
    """Init agrees with I_F, and every state agreeing with G_F is a goal state."""
    v0 = valuation(q.features, inst, inst.init)
    if not consistent(v0, q.init):
        return Verdict(
            False,
            "init-inconsistent",
            {"state": inst.init, "valuation": v0.describe(q.features)},
        )
    states = scope_states(inst, scope, max_states) if states is None else states
    table = FeatureTable(q.features, inst)
    batch = to_batch(inst, states)
    counts = table.counts(batch)
    goal_like = table.literal_mask(q.goal, counts, batch.size)
    for i in np.flatnonzero(goal_like):
        s = states[int(i)]
        if not inst.is_goal(s):
            return Verdict(
                False,
                "goal-mismatch",
                {"state": s, "valuation": valuation(q.features, inst, s).describe(q.features)},
                {"states": len(states)},
            )
    return Verdict(True, "complies", stats={"states": len(states), "scope": scope})


def monotone(feature: Feature, inst: Instance, max_states=DEFAULT_MAX_STATES, space=None):
    """Extensions only shrink, only grow, or stay equal on each reachable transition."""
    space = space or reachable(inst, max_states)
    batch = to_batch(inst, space.states)
    ext = evaluate_batch(feature.formula, batch, feature.vars).reshape(batch.size, -1)
    for i, a, j in space.transitions:
        e, f = ext[i], ext[j]
        if not ((e <= f).all() or (f <= e).all()):
            u = inst.universe
            gone = _tuples(e & ~f, len(feature.vars), u)
            new = _tuples(f & ~e, len(feature.vars), u)
            return Verdict(
                False,
                "not-monotone",
                {"state": space.states[i], "action": str(a), "removed": gone, "added": new},
                {"transitions": len(space.transitions)},
            )
    return Verdict(True, "monotone", stats={"transitions": len(space.transitions)})


def _tuples(flat_mask, k, universe):
    n = len(universe)
    out = []
    for idx in np.flatnonzero(flat_mask):
        pos = np.unravel_index(int(idx), (n,) * k) if k else ()
        out.append(",".join(universe[int(p)] for p in pos))
    return out


# -- partitions and precondition formulas ---------------------------------------------------


@dataclass(frozen=True)
class EffectPartition:
    inc: tuple = ()
    dec: tuple = ()
    eq: tuple = ()
    true: tuple = ()
    false: tuple = ()

    def items(self):
        return [(k, getattr(self, k)) for k in CHANGE_KINDS]

    def kind_of(self, feature_name):
        for k, fs in self.items():
            if any(f.name == feature_name for f in fs):
                return k
        raise KeyError(feature_name)


def effect_partition(action: AbstractAction, features) -> EffectPartition:
    groups = {k: [] for k in CHANGE_KINDS}
    for f in features:
        groups[action.effect_on(f.name) or "eq"].append(f)
    return EffectPartition(**{k: tuple(v) for k, v in groups.items()})


def pre_formula(action: AbstractAction, feature: Feature):
    """``T``, ``E x Psi`` or ``A x ~Psi`` depending on the precondition on ``feature``."""
    lit = action.pre_on(feature.name)
    if lit is None:
        return TRUE
    if lit.positive:
        return exists(feature.vars, feature.formula)
    return forall(feature.vars, neg(feature.formula))


def abstract_pre_formula(action: AbstractAction, features):
    """Conjunction of :func:`pre_formula` over all features: ``Pre(a)`` as a sentence."""
    return conj(*(pre_formula(action, f) for f in features))


def describe_state(inst, s):
    return state_str(s)
