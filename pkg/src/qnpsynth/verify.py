"""Exhaustive verification on explicit state spaces.

Everything here enumerates: states (reachable from the initial state, or
all subsets of the ground-atom vocabulary), ground actions, and argument
tuples. Witnesses are the earliest in BFS state order, then abstract-action,
schema and argument order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .abstraction import (
    CHANGE_KINDS,
    CLAUSE_NAMES,
    YES,
    Abstraction,
    FeatureTable,
    Policy,
    represent_codes,
    represents,
    scope_states,
    valuation,
    complies,
)
from .base import N, S, SynthesisBase
from .errors import BudgetExceeded, InputError
from .fol.batch import evaluate_batch
from .fol.syntax import Var, free_vars, fresh_name
from .strips import (
    DEFAULT_MAX_STATES,
    Instance,
    apply_to_batch,
    applicable_mask,
    ground,
    instantiate,
    reachable,
    res,
    to_batch,
)
from .synthesis import GuaranteeSet, change_condition, concept_subformulas, lift
from .verdict import Verdict

DEFAULT_MAX_CHECKS = 10**7


@dataclass
class Budgets:
    max_states: int = DEFAULT_MAX_STATES
    max_checks: int = DEFAULT_MAX_CHECKS


class _Counter:
    def __init__(self, budgets: Budgets):
        self.budgets = budgets
        self.checks = 0

    def spend(self, k):
        self.checks += int(k)
        if self.checks > self.budgets.max_checks:
            raise BudgetExceeded("max_checks", self.budgets.max_checks)


def _states(inst, scope, budgets, all_different=False):
    return scope_states(inst, scope, budgets.max_states, all_different)


def _tuples(n, k):
    return list(itertools.product(range(n), repeat=k))


def _names(inst, idx):
    return tuple(inst.universe[i] for i in idx)


# -- guarantee validity -----------------------------------------------------------------


def check_guarantee_valid(
    g: GuaranteeSet, inst: Instance, scope="reachable", budgets: Budgets = None, states=None, all_different=False
) -> Verdict:
    """Wherever ``Pre(abs) & Psi_a(o)`` holds, ``a(o)`` must instantiate the abstract action."""
    budgets = budgets or Budgets()
    counter = _Counter(budgets)
    q = g.abstraction
    states = _states(inst, scope, budgets, all_different) if states is None else states
    batch = to_batch(inst, states)
    table = FeatureTable(q.features, inst)
    before = table.counts(batch)
    n = len(inst.universe)
    best = None
    triggered = 0
    for ai, entry in enumerate(g):
        act = entry.action
        pre = table.literal_mask(act.pre, before, batch.size)
        for si, dj in enumerate(entry.disjuncts):
            schema = g.domain.schema(dj.schema)
            k = len(schema.params)
            counter.spend(batch.size * n**k)
            psi = evaluate_batch(dj.formula, batch, schema.params).reshape(batch.size, -1)
            for ti, idx in enumerate(_tuples(n, k)):
                if all_different and len(set(idx)) < k:
                    continue
                hit = pre & psi[:, ti]
                if not hit.any():
                    continue
                triggered += int(hit.sum())
                ga = instantiate(schema, _names(inst, idx))
                after = table.counts(apply_to_batch(batch, ga, inst.universe))
                codes = represent_codes(act, q.features, before, after, applicable_mask(batch, ga, inst.universe))
                bad = np.flatnonzero(hit & (codes != YES))
                if bad.size:
                    cand = (int(bad[0]), ai, si, ti)
                    if best is None or cand < best[0]:
                        best = (cand, ga, CLAUSE_NAMES[int(codes[bad[0]])])
    stats = {"states": len(states), "scope": scope, "checks": counter.checks, "triggered": triggered}
    if best is None:
        return Verdict(True, "valid", stats=stats)
    (s_i, ai, _, _), ga, clause = best
    s = states[s_i]
    act = g.abstraction.actions[ai]
    detail = represents(q, act, ga, inst, s)
    return Verdict(
        False,
        "counterexample",
        {
            "state": s,
            "valuation": valuation(q.features, inst, s).describe(q.features),
            "abstract_action": act.name,
            "ground_action": str(ga),
            "clause": clause,
            "detail": detail.detail,
        },
        stats,
    )


# -- direct soundness -----------------------------------------------------------------------


def instantiable_table(q: Abstraction, inst: Instance, states, counter: _Counter, all_different=False):
    """Boolean array (states x abstract actions): is there an instantiating ground action?"""
    batch = to_batch(inst, states)
    table = FeatureTable(q.features, inst)
    before = table.counts(batch)
    actions = ground(inst, all_different)
    counter.spend(batch.size * len(actions))
    found = np.zeros((batch.size, len(q.actions)), dtype=bool)
    first = [[None] * len(q.actions) for _ in range(batch.size)]
    for ga in actions:
        app = applicable_mask(batch, ga, inst.universe)
        if not app.any():
            continue
        after = table.counts(apply_to_batch(batch, ga, inst.universe))
        for j, act in enumerate(q.actions):
            ok = represent_codes(act, q.features, before, after, app) == YES
            for i in np.flatnonzero(ok & ~found[:, j]):
                first[int(i)][j] = ga
            found[:, j] |= ok
    applicable = np.stack([table.literal_mask(a.pre, before, batch.size) for a in q.actions], axis=1)
    return applicable, found, first


def check_soundness_direct(q: Abstraction, inst: Instance, budgets: Budgets = None, states=None, all_different=False):
    """Every applicable abstract action is instantiated by some ground action, on every reachable state."""
    budgets = budgets or Budgets()
    counter = _Counter(budgets)
    states = reachable(inst, budgets.max_states, all_different=all_different).states if states is None else states
    applicable, found, _ = instantiable_table(q, inst, states, counter, all_different)
    bad = applicable & ~found
    stats = {"states": len(states), "checks": counter.checks}
    rows = np.flatnonzero(bad.any(axis=1))
    if not rows.size:
        return Verdict(True, "sound", stats=stats)
    i = int(rows[0])
    j = int(np.flatnonzero(bad[i])[0])
    s = states[i]
    return Verdict(
        False,
        "unsound",
        {
            "state": s,
            "valuation": valuation(q.features, inst, s).describe(q.features),
            "abstract_action": q.actions[j].name,
            "index": i,
        },
        stats,
    )


# -- membership, invariants, necessity ---------------------------------------------------------


def check_implication(q: Abstraction, g: GuaranteeSet, inst: Instance, budgets: Budgets = None, states=None,
                      all_different=False):
    """On every state: valuation-level ``Pre(abs)`` implies the assembled formula of ``g``."""
    budgets = budgets or Budgets()
    if states is None:
        states = reachable(inst, budgets.max_states, all_different=all_different).states
    batch = to_batch(inst, states)
    table = FeatureTable(q.features, inst)
    counts = table.counts(batch)
    best = None
    for j, entry in enumerate(g):
        pre = table.literal_mask(entry.action.pre, counts, batch.size)
        phi = evaluate_batch(entry.formula, batch)
        bad = np.flatnonzero(pre & ~phi)
        if bad.size and (best is None or (int(bad[0]), j) < best):
            best = (int(bad[0]), j)
    stats = {"states": len(states)}
    if best is None:
        return Verdict(True, "implied", stats=stats)
    s = states[best[0]]
    return Verdict(
        False,
        "fails-implication",
        {
            "state": s,
            "valuation": valuation(q.features, inst, s).describe(q.features),
            "abstract_action": q.actions[best[1]].name,
        },
        stats,
    )


def check_membership(q: Abstraction, g: GuaranteeSet, inst: Instance, budgets: Budgets = None, all_different=False):
    """Compliance plus ``Pre(abs) => Phi`` on every reachable state."""
    budgets = budgets or Budgets()
    space = reachable(inst, budgets.max_states, all_different=all_different)
    comp = complies(q, inst, states=space.states)
    if not comp:
        return Verdict(False, "fails-compliance", {"reason": comp.verdict, **(comp.witness or {})}, comp.stats)
    imp = check_implication(q, g, inst, budgets, space.states)
    if not imp:
        return imp
    return Verdict(True, "member", stats={"states": len(space.states)})


def check_invariant(f, inst: Instance, budgets: Budgets = None, states=None, all_different=False):
    """Evaluate the closed formula ``f`` on every reachable state."""
    if free_vars(f):
        raise InputError(f"invariant candidates must be closed, free: {sorted(free_vars(f))}")
    budgets = budgets or Budgets()
    if states is None:
        states = reachable(inst, budgets.max_states, all_different=all_different).states
    vals = evaluate_batch(f, to_batch(inst, states))
    bad = np.flatnonzero(~vals)
    stats = {"states": len(states)}
    if bad.size:
        return Verdict(False, "witness", {"state": states[int(bad[0])], "index": int(bad[0])}, stats)
    return Verdict(True, "holds-on-reachable", stats=stats)


# -- policy execution --------------------------------------------------------------------------


def _policy_step(q, policy, inst, s, actions):
    """(abstract action, instantiating ground actions in order) or a failure string."""
    v = valuation(q.features, inst, s)
    name = policy.choose(v)
    if name is None:
        return "policy-incomplete", v, None
    act = q.action(name)
    found = [ga for ga in actions if ga.pre <= s and represents(q, act, ga, inst, s)]
    if not found:
        return "stuck", v, act
    return found, v, act


def run_policy(policy: Policy, q: Abstraction, inst: Instance, max_steps=1000, chooser="first",
               budgets: Budgets = None, all_different=False):
    """Execute the abstract policy on ``inst``; ``chooser="all"`` follows every instantiation."""
    if chooser not in ("first", "all"):
        raise InputError(f"unknown chooser {chooser!r}")
    budgets = budgets or Budgets()
    actions = ground(inst, all_different)
    if chooser == "first":
        return _run_first(policy, q, inst, max_steps, actions)
    return _run_all(policy, q, inst, max_steps, actions, budgets)


def _fail(kind, s, q, v, act, trace=None, stats=None):
    w = {"state": s, "valuation": v.describe(q.features)}
    if act is not None:
        w["abstract_action"] = act.name
    if trace is not None:
        w["trace"] = trace
    return Verdict(False, kind, w, stats or {})


def _run_first(policy, q, inst, max_steps, actions):
    s, trace, seen = inst.init, [], {inst.init}
    while True:
        if inst.is_goal(s):
            return Verdict(True, "goal-reached", {"trace": trace}, {"steps": len(trace)})
        if len(trace) >= max_steps:
            return Verdict(False, "step-limit", {"state": s, "trace": trace}, {"steps": len(trace)})
        found, v, act = _policy_step(q, policy, inst, s, actions)
        if isinstance(found, str):
            return _fail(found, s, q, v, act, trace, {"steps": len(trace)})
        ga = found[0]
        trace.append(f"{act.name}: {ga}")
        s = res(s, ga)
        if s in seen:
            return _fail("non-terminating", s, q, valuation(q.features, inst, s), act, trace, {"steps": len(trace)})
        seen.add(s)


def _run_all(policy, q, inst, max_steps, actions, budgets):
    """Depth-first exploration of every spawned execution with cycle detection."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color, depth, paths = {}, {}, {}
    stack = [(inst.init, None)]
    succ_of = {}
    while stack:
        s, it = stack.pop()
        if it is None:
            c = color.get(s, WHITE)
            if c == BLACK:
                continue
            if c == GRAY:
                continue
            if inst.is_goal(s):
                color[s], depth[s], paths[s] = BLACK, 0, 1
                continue
            if len(color) >= budgets.max_states:
                raise BudgetExceeded("max_states", budgets.max_states)
            found, v, act = _policy_step(q, policy, inst, s, actions)
            if isinstance(found, str):
                return _fail(found, s, q, v, act, stats={"explored": len(color)})
            succ = list(dict.fromkeys(res(s, ga) for ga in found))
            succ_of[s] = succ
            color[s] = GRAY
            stack.append((s, iter(succ)))
            continue
        nxt = next(it, None)
        if nxt is None:
            kids = succ_of[s]
            depth[s] = 1 + max(depth[t] for t in kids)
            paths[s] = sum(paths[t] for t in kids)
            color[s] = BLACK
            if depth[s] > max_steps:
                return Verdict(False, "step-limit", {"state": s}, {"explored": len(color), "depth": depth[s]})
            continue
        stack.append((s, it))
        c = color.get(nxt, WHITE)
        if c == GRAY:
            v = valuation(q.features, inst, nxt)
            return _fail("non-terminating", nxt, q, v, None, stats={"explored": len(color)})
        if c == WHITE:
            stack.append((nxt, None))
    s0 = inst.init
    return Verdict(
        True,
        "goal-reached",
        stats={"explored": len(color), "max_steps": depth[s0], "branches": paths[s0]},
    )


# -- enumerated theorems: base sandwich, lift, change conditions ------------------------------------


def _fresh_vars(k, avoid, base="x"):
    taken, out = set(avoid), []
    for _ in range(k):
        v = fresh_name(base, taken)
        taken.add(v)
        out.append(v)
    return tuple(out)


def sandwich_violations(schema, phi, lower, upper, inst: Instance, states, xs=None, counter=None,
                        applicable_only=True):
    """Count ``lower & ~phi'`` and ``phi' & ~upper`` over states, tuples and bindings.

    ``phi'`` is ``phi`` evaluated after ``schema(o)``; ``lower``/``upper`` are
    evaluated before. Returns ``(violations, first_witness)``.
    """
    xs = tuple(sorted(free_vars(phi))) if xs is None else tuple(xs)
    batch = to_batch(inst, states)
    n, k = len(inst.universe), len(schema.params)
    if counter:
        counter.spend(batch.size * n**k)
    free = tuple(schema.params) + xs
    lo = evaluate_batch(lower, batch, free).reshape(batch.size, n**k, -1)
    hi = evaluate_batch(upper, batch, free).reshape(batch.size, n**k, -1)
    total, first = 0, None
    for ti, idx in enumerate(_tuples(n, k)):
        ga = instantiate(schema, _names(inst, idx))
        mask = applicable_mask(batch, ga, inst.universe) if applicable_only else np.ones(batch.size, bool)
        if not mask.any():
            continue
        after = evaluate_batch(phi, apply_to_batch(batch, ga, inst.universe), xs).reshape(batch.size, -1)
        bad = ((lo[:, ti] & ~after) | (after & ~hi[:, ti])) & mask[:, None]
        c = int(bad.sum())
        if c:
            total += c
            if first is None:
                i, j = map(int, np.argwhere(bad)[0])
                pos = np.unravel_index(j, (n,) * len(xs)) if xs else ()
                first = {
                    "state": states[i],
                    "ground_action": str(ga),
                    "binding": {v: inst.universe[int(p)] for v, p in zip(xs, pos)},
                    "lower": bool(lo[i, ti, j]),
                    "after": bool(after[i, j]),
                    "upper": bool(hi[i, ti, j]),
                }
    return total, first


def base_atoms(sig, schema):
    """One atom per predicate and one ``p*`` per closure-enabled predicate, over fresh variables."""
    from .fol.syntax import STAR, Atom, Closure

    out = []
    for p, k in sig.predicates.items():
        out.append(Atom(p, tuple(Var(v) for v in _fresh_vars(k, schema.params))))
    for p in sorted(sig.closure_enabled):
        x, y = _fresh_vars(2, schema.params)
        out.append(Closure(p, STAR, Var(x), Var(y)))
    return out


def check_base_sandwich(base: SynthesisBase, inst: Instance, states, budgets: Budgets = None,
                        applicable_only=True):
    """Base validity: ``S => atom after => N`` for every atom, schema, tuple and state."""
    counter = _Counter(budgets or Budgets())
    rows, total, first = [], 0, None
    for schema in inst.domain.schemas:
        for atom in base_atoms(inst.signature, schema):
            lower = base.condition(S, schema, atom)
            upper = base.condition(N, schema, atom)
            c, w = sandwich_violations(schema, atom, lower, upper, inst, states, counter=counter,
                                       applicable_only=applicable_only)
            rows.append({"schema": schema.name, "atom": str(atom), "violations": c})
            total += c
            if w and first is None:
                first = {"schema": schema.name, "atom": str(atom), **w}
    stats = {"states": len(states), "checks": counter.checks, "rows": rows}
    if total:
        return Verdict(False, "violations", first, {**stats, "violations": total})
    return Verdict(True, "sandwich-holds", stats=stats)


def check_lift_sandwich(base: SynthesisBase, q: Abstraction, inst: Instance, states, budgets: Budgets = None):
    """Lift validity for every subformula of every feature concept and every schema."""
    counter = _Counter(budgets or Budgets())
    total, first, count = 0, None, 0
    for f in q.features:
        for schema in inst.domain.schemas:
            _, _, subs = concept_subformulas(f, schema)
            for phi in subs:
                lower, upper = lift(base, schema, phi, S), lift(base, schema, phi, N)
                c, w = sandwich_violations(schema, phi, lower, upper, inst, states, counter=counter)
                count += 1
                total += c
                if w and first is None:
                    first = {"feature": f.name, "schema": schema.name, "formula": str(phi), **w}
    stats = {"states": len(states), "checks": counter.checks, "formulas": count}
    if total:
        return Verdict(False, "violations", first, {**stats, "violations": total})
    return Verdict(True, "lift-holds", stats=stats)


def _relation_holds(kind, e, f):
    """``e``/``f``: (B, m) extensions before/after; returns (B,) booleans."""
    sub = (e <= f).all(axis=1)
    sup = (f <= e).all(axis=1)
    same = sub & sup
    if kind == "inc":
        return sub & ~same
    if kind == "dec":
        return sup & ~same
    if kind == "eq":
        return same
    if kind == "true":
        return f.any(axis=1)
    return ~f.any(axis=1)


def check_change_conditions(base: SynthesisBase, q: Abstraction, inst: Instance, states, budgets: Budgets = None):
    """``S^kind_C(o)`` true before an applicable ``a(o)`` implies the matching extension change."""
    counter = _Counter(budgets or Budgets())
    batch = to_batch(inst, states)
    n = len(inst.universe)
    total, first, rows = 0, None, []
    for f in q.features:
        kinds = [k for k in CHANGE_KINDS if (k in ("inc", "dec", "eq")) == f.numerical or k == "eq"]
        ext = evaluate_batch(f.formula, batch, f.vars).reshape(batch.size, -1)
        for schema in inst.domain.schemas:
            k = len(schema.params)
            conds = {
                kind: evaluate_batch(change_condition(S, kind, f, schema, base), batch, schema.params).reshape(
                    batch.size, -1
                )
                for kind in kinds
            }
            counter.spend(batch.size * n**k * len(kinds))
            for ti, idx in enumerate(_tuples(n, k)):
                ga = instantiate(schema, _names(inst, idx))
                app = applicable_mask(batch, ga, inst.universe)
                if not app.any():
                    continue
                after = evaluate_batch(f.formula, apply_to_batch(batch, ga, inst.universe), f.vars)
                after = after.reshape(batch.size, -1)
                for kind in kinds:
                    bad = app & conds[kind][:, ti] & ~_relation_holds(kind, ext, after)
                    c = int(bad.sum())
                    if c:
                        total += c
                        if first is None:
                            i = int(np.flatnonzero(bad)[0])
                            first = {"feature": f.name, "kind": kind, "state": states[i], "ground_action": str(ga)}
        rows.append(f.name)
    stats = {"states": len(states), "checks": counter.checks, "features": rows}
    if total:
        return Verdict(False, "violations", first, {**stats, "violations": total})
    return Verdict(True, "changes-implied", stats=stats)
