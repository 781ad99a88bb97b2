"""Lifting base conditions to arbitrary formulas and assembling guarantees.

For an action schema ``a(z)`` and a formula ``phi(x)``, ``lift`` produces
``N`` (necessary) and ``S`` (sufficient) conditions on the current state for
``phi`` to hold after ``a``. Change conditions then describe how a feature's
extension moves, and the guarantee for an abstract action is

    Phi = E z ( Psi_a1(z) | Psi_a2(z) | ... )
    Psi_a(z) = Pre(a(z)) & AND over features C of ( Pre(abs)_C & S^kind_C(z) )

with ``kind`` the change the abstract action prescribes for ``C``. The
necessary counterpart uses ``N`` change conditions and no ``Pre(abs)_C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .abstraction import (
    BOOLEAN,
    CHANGE_KINDS,
    Abstraction,
    AbstractAction,
    EffectPartition,
    Feature,
    effect_partition,
    pre_formula,
)
from .base import N, S, GeneralBase, SynthesisBase, eliminate_plus
from .errors import InputError
from .fol.printer import to_infix, to_sexpr
from .fol.simplify import simplify
from .fol.syntax import (
    PLUS,
    TRUE,
    And,
    Atom,
    Bottom,
    Closure,
    Eq,
    Exists,
    Forall,
    Implies,
    Not,
    Or,
    Top,
    Var,
    all_var_names,
    conj,
    disj,
    exists,
    forall,
    fresh_name,
    implies,
    neg,
    rename_apart,
    substitute,
    subformulas,
)
from .strips import ActionSchema, DomainSchema

#: how the necessary-condition display names the last two change kinds
CHG_ALIASES = {"true": "T", "false": "F"}


def other(x):
    return S if x == N else N


@dataclass(frozen=True)
class LiftedCondition:
    x: str
    schema: str
    source: object
    result: object


def lift(base: SynthesisBase, a: ActionSchema, phi, x) -> object:
    """``x``-condition (``"N"`` or ``"S"``) for ``phi`` to hold after ``a(z)``.

    ``phi`` must be free of ``p+`` and its variables must not clash with the
    schema parameters (see :func:`prepare`).
    """
    if x not in (N, S):
        raise InputError(f"condition kind must be N or S, got {x!r}")
    return _lift(base, a, phi, x)


def _lift(base, a, f, x):
    if isinstance(f, (Top, Bottom, Eq)):
        return f
    if isinstance(f, (Atom, Closure)):
        if isinstance(f, Closure) and f.kind == PLUS:
            raise InputError(f"{f.pred}+ must be eliminated before lifting")
        return base.condition(x, a, f)
    if isinstance(f, Not):
        return neg(_lift(base, a, f.arg, other(x)))
    if isinstance(f, And):
        return conj(*(_lift(base, a, g, x) for g in f.args))
    if isinstance(f, Or):
        return disj(*(_lift(base, a, g, x) for g in f.args))
    if isinstance(f, Implies):
        return implies(_lift(base, a, f.left, other(x)), _lift(base, a, f.right, x))
    if isinstance(f, Exists):
        return exists(f.vars, _lift(base, a, f.body, x))
    if isinstance(f, Forall):
        return forall(f.vars, _lift(base, a, f.body, x))
    raise InputError(f"cannot lift {f!r}")


def lift_condition(base, a, phi, x) -> LiftedCondition:
    return LiftedCondition(x, a.name, phi, lift(base, a, phi, x))


def prepare(feature: Feature, a: ActionSchema):
    """Concept variables and formula made safe for lifting over ``a``.

    ``p+`` is eliminated, and both free and bound variables are renamed away
    from the schema parameters.
    """
    params = set(a.params)
    taken = params | all_var_names(feature.formula)
    renames, xs = {}, []
    for v in feature.vars:
        if v in params:
            nv = fresh_name(v, taken)
            taken.add(nv)
            renames[v] = Var(nv)
            xs.append(nv)
        else:
            xs.append(v)
    body = substitute(rename_apart(feature.formula, params | {r.name for r in renames.values()}), renames)
    body = eliminate_plus(body, avoid=taken | set(xs))
    return tuple(xs), rename_apart(body, params)


def change_condition(x, kind, feature: Feature, a: ActionSchema, base: SynthesisBase = None):
    """``x``-condition over ``z`` for the feature's extension to change by ``kind``.

    Sufficient conditions for ``inc`` and ``dec`` use the strengthened forms
    that also force the extension to move in one direction only.
    """
    if kind not in CHANGE_KINDS:
        raise InputError(f"unknown change kind {kind!r}")
    if x not in (N, S):
        raise InputError(f"condition kind must be N or S, got {x!r}")
    if feature.kind == BOOLEAN and kind in ("inc", "dec"):
        raise InputError(f"boolean feature {feature.name} cannot {kind}rease")
    if feature.numerical and kind in ("true", "false"):
        raise InputError(f"numerical feature {feature.name} cannot become {kind}")
    base = base or GeneralBase()
    xs, psi = prepare(feature, a)
    cond = lift(base, a, psi, x)
    hat = lift(base, a, psi, other(x))
    if kind == "inc":
        out = exists(xs, conj(neg(psi), cond))
        if x == S:
            out = conj(forall(xs, implies(psi, cond)), out)
    elif kind == "dec":
        out = exists(xs, conj(psi, neg(hat)))
        if x == S:
            out = conj(forall(xs, implies(hat, psi)), out)
    elif kind == "eq":
        out = conj(forall(xs, implies(psi, cond)), forall(xs, implies(hat, psi)))
    elif kind == "true":
        out = exists(xs, cond)
    else:
        out = forall(xs, neg(hat))
    return out


# -- assembly -------------------------------------------------------------------------------


@dataclass
class Part:
    """One conjunct of a disjunct: a feature, its change kind and its condition."""

    feature: str
    kind: str
    pre: object
    condition: object


@dataclass
class Disjunct:
    schema: str
    params: tuple
    formula: object
    raw: object = field(repr=False, default=None)
    parts: list = field(repr=False, default_factory=list)


@dataclass
class ActionGuarantee:
    action: AbstractAction
    partition: EffectPartition
    disjuncts: list

    @property
    def params(self):
        out = []
        for d in self.disjuncts:
            out.extend(p for p in d.params if p not in out)
        return tuple(out)

    @property
    def formula(self):
        """``E z (Psi_1(z) | ... )`` over the union of schema parameters."""
        return exists(self.params, disj(*(d.formula for d in self.disjuncts)))

    def disjunct(self, schema):
        for d in self.disjuncts:
            if d.schema == schema:
                return d
        raise KeyError(schema)


@dataclass
class GuaranteeSet:
    """Guarantees for every abstract action, either sufficient or necessary."""

    polarity: str
    abstraction: Abstraction
    domain: DomainSchema
    base: str
    entries: dict

    def __getitem__(self, name):
        return self.entries[name]

    def __iter__(self):
        return iter(self.entries.values())

    def formula(self, name):
        return self.entries[name].formula


def _assemble(q: Abstraction, d: DomainSchema, base, x, with_pre, simplify_output=True):
    entries = {}
    for act in q.actions:
        part = effect_partition(act, q.features)
        disjuncts = []
        for a in d.schemas:
            parts = []
            for kind, fs in part.items():
                for f in fs:
                    cond = change_condition(x, kind, f, a, base)
                    pre = pre_formula(act, f) if with_pre else TRUE
                    parts.append(Part(f.name, kind, pre, cond))
            raw = conj(a.precondition(), *(conj(p.pre, p.condition) for p in parts))
            out = simplify(raw) if simplify_output else raw
            disjuncts.append(Disjunct(a.name, a.params, out, raw, parts))
        entries[act.name] = ActionGuarantee(act, part, disjuncts)
    return GuaranteeSet("sufficient" if x == S else "necessary", q, d, base.describe(), entries)


def synthesize_sufficient(q: Abstraction, d: DomainSchema, base: SynthesisBase = None, simplify_output=True):
    return _assemble(q, d, base or GeneralBase(), S, True, simplify_output)


def synthesize_necessary(q: Abstraction, d: DomainSchema, base: SynthesisBase = None, simplify_output=True):
    return _assemble(q, d, base or GeneralBase(), N, False, simplify_output)


# -- reports ----------------------------------------------------------------------------------


def _kinds_line(partition: EffectPartition, necessary=False):
    bits = []
    for k, fs in partition.items():
        label = k
        if necessary and k in CHG_ALIASES:
            label = f"{k} ({CHG_ALIASES[k]})"
        bits.append(f"{label}={{{', '.join(f.name for f in fs)}}}")
    return "; ".join(bits)


def report_data(suff: GuaranteeSet, nec: GuaranteeSet, comparisons=None):
    """A JSON-ready description of both guarantee sets."""
    actions = []
    for entry in suff:
        name = entry.action.name
        nentry = nec[name]
        item = {
            "action": str(entry.action),
            "partition": {k: [f.name for f in fs] for k, fs in entry.partition.items()},
            "sufficient": {
                "disjuncts": {d.schema: to_sexpr(d.formula) for d in entry.disjuncts},
                "formula": to_sexpr(entry.formula),
            },
            "necessary": {
                "disjuncts": {d.schema: to_sexpr(d.formula) for d in nentry.disjuncts},
                "formula": to_sexpr(nentry.formula),
                "change_kinds": ["inc", "dec", "eq", "true (T)", "false (F)"],
            },
        }
        if comparisons and name in comparisons:
            item["necessary_vs_sufficient"] = comparisons[name]
        actions.append(item)
    return {
        "abstraction": suff.abstraction.name,
        "domain": suff.domain.name,
        "base": suff.base,
        "actions": actions,
    }


def report_text(suff: GuaranteeSet, nec: GuaranteeSet, comparisons=None):
    lines = [
        f"; guarantees for abstraction {suff.abstraction.name} over domain {suff.domain.name}",
        f"; base: {suff.base}",
    ]
    for entry in suff:
        name = entry.action.name
        nentry = nec[name]
        lines += ["", f"; abstract action {entry.action}"]
        lines.append(f"; partition: {_kinds_line(entry.partition)}")
        for f in suff.abstraction.features:
            kind = entry.partition.kind_of(f.name)
            lit = entry.action.pre_on(f.name)
            lines.append(f";   {f.name}: change {kind}, precondition {lit if lit else 'none'}")
        lines.append("(sufficient " + name)
        for dj in entry.disjuncts:
            lines.append(f"  (disjunct {dj.schema} ({' '.join(dj.params)})")
            lines.append(f"    {to_sexpr(dj.formula)})")
            lines.append(f"  ; {to_infix(dj.formula)}")
        lines.append(f"  (phi {to_sexpr(entry.formula)}))")
        lines.append(f"; necessary change kinds: {_kinds_line(nentry.partition, necessary=True)}")
        lines.append("(necessary " + name)
        for dj in nentry.disjuncts:
            lines.append(f"  (disjunct {dj.schema} ({' '.join(dj.params)})")
            lines.append(f"    {to_sexpr(dj.formula)})")
            lines.append(f"  ; {to_infix(dj.formula)}")
        lines.append(f"  (gamma {to_sexpr(nentry.formula)}))")
        if comparisons and name in comparisons:
            lines.append(f"; necessary vs sufficient: {comparisons[name]}")
    return "\n".join(lines) + "\n"


def concept_subformulas(feature: Feature, a: ActionSchema):
    """Prepared concept of ``feature`` for ``a`` and all of its subformulas."""
    xs, psi = prepare(feature, a)
    return xs, psi, list(dict.fromkeys(subformulas(psi)))
