"""Readers for domain, instance, abstraction, policy, signature and config files.

All files are S-expressions; see the README for the grammar. Every error is a
:class:`~qnpsynth.sexpr.ParseError` carrying line and column.
"""

from __future__ import annotations

from pathlib import Path

import tomli

from . import sexpr
from .abstraction import BOOLEAN, NUMERICAL, Abstraction, AbstractAction, Effect, Feature, Literal, Policy
from .errors import InputError
from .fol.parser import parse_formula
from .fol.syntax import Atom, Const, FormulaError, Signature, Var
from .sexpr import SList, Symbol, fail
from .strips import ActionSchema, DomainSchema, Instance


def read_text(path):
    return Path(path).read_text(encoding="utf-8")


def _head(expr, expected, source):
    if not isinstance(expr, list) or not expr or expr[0] != expected:
        fail(f"expected ({expected} ...)", expr, source)


def _sections(items, source):
    """Map section name to its body for ``(name ...)`` items."""
    out = {}
    for item in items:
        if not isinstance(item, list) or not item or isinstance(item[0], list):
            fail("expected a (section ...) form", item, source)
        if item[0] in out:
            fail(f"duplicate section {item[0]!r}", item, source)
        out[str(item[0])] = item
    return out


def _symbols(items, source, what="name"):
    for x in items:
        if isinstance(x, list):
            fail(f"expected a {what}, found a list", x, source)
    return [str(x) for x in items]


def _keywords(items, source, allowed):
    out = {}
    i = 0
    while i < len(items):
        key = items[i]
        if isinstance(key, list) or not key.startswith(":"):
            fail("expected a :keyword", key, source)
        if key not in allowed:
            fail(f"unknown keyword {key}", key, source)
        if i + 1 >= len(items):
            fail(f"missing value for {key}", key, source)
        out[str(key)] = items[i + 1]
        i += 2
    return out


# -- signatures and domains -----------------------------------------------------------


def _signature_from(secs, source, at):
    consts = _symbols(secs["constants"][1:], source) if "constants" in secs else []
    preds = {}
    for p in secs.get("predicates", [None])[1:]:
        if not isinstance(p, list) or len(p) != 2 or isinstance(p[0], list):
            fail("expected (name arity)", p, source)
        try:
            k = int(p[1])
        except ValueError:
            fail("arity must be an integer", p[1], source)
        if k < 0:
            fail("arity must be non-negative", p[1], source)
        if p[0] in preds:
            fail(f"duplicate predicate {p[0]!r}", p, source)
        preds[str(p[0])] = k
    closures = None
    if "closures" in secs:
        closures = _symbols(secs["closures"][1:], source)
    try:
        return Signature(consts, preds, closures)
    except FormulaError as e:
        fail(str(e), at, source)


def _atom(x, params, sig, source):
    if not isinstance(x, list) or not x or isinstance(x[0], list):
        fail("expected an atom (p t ...)", x, source)
    pred = str(x[0])
    if pred not in sig.predicates:
        fail(f"unknown predicate {pred!r}", x, source)
    if sig.predicates[pred] != len(x) - 1:
        fail(f"{pred} expects {sig.predicates[pred]} arguments", x, source)
    args = []
    for t in x[1:]:
        if isinstance(t, list):
            fail("expected a term", t, source)
        if t in sig.constants:
            args.append(Const(str(t)))
        elif t in params:
            args.append(Var(str(t)))
        else:
            fail(f"{t!r} is neither a parameter nor a constant", t, source)
    return Atom(pred, tuple(args))


def _atom_list(x, params, sig, source):
    if not isinstance(x, list):
        fail("expected a list of atoms", x, source)
    return tuple(_atom(a, params, sig, source) for a in x)


def parse_domain(text, source=None) -> DomainSchema:
    expr = sexpr.loads(text, source)
    _head(expr, "domain", source)
    rest = list(expr[1:])
    name = "domain"
    if rest and not isinstance(rest[0], list):
        name = str(rest.pop(0))
    actions = [x for x in rest if isinstance(x, list) and x and x[0] == "action"]
    secs = _sections([x for x in rest if x not in actions], source)
    for k in secs:
        if k not in ("constants", "predicates", "closures"):
            fail(f"unknown domain section {k!r}", secs[k], source)
    sig = _signature_from(secs, source, expr)
    schemas = []
    for act in actions:
        if len(act) < 2 or isinstance(act[1], list):
            fail("expected (action Name :params (...) ...)", act, source)
        kw = _keywords(act[2:], source, {":params", ":pre", ":add", ":del"})
        params = tuple(_symbols(kw.get(":params", SList()), source, "parameter"))
        try:
            schemas.append(
                ActionSchema(
                    str(act[1]),
                    params,
                    _atom_list(kw.get(":pre", SList()), params, sig, source),
                    _atom_list(kw.get(":add", SList()), params, sig, source),
                    _atom_list(kw.get(":del", SList()), params, sig, source),
                )
            )
        except InputError as e:
            fail(str(e), act, source)
    try:
        return DomainSchema(sig, schemas, name)
    except InputError as e:
        fail(str(e), expr, source)


def parse_signature(text, source=None) -> Signature:
    """A ``(signature ...)`` file, or the signature of a ``(domain ...)`` file."""
    expr = sexpr.loads(text, source)
    if isinstance(expr, list) and expr and expr[0] == "domain":
        return parse_domain(text, source).signature
    _head(expr, "signature", source)
    secs = _sections(expr[1:], source)
    return _signature_from(secs, source, expr)


# -- instances ------------------------------------------------------------------------


def _ground_atoms(body, sig, universe, source):
    items = list(body)
    if len(items) == 1 and isinstance(items[0], list) and items[0] and isinstance(items[0][0], list):
        items = list(items[0])
    out = []
    for x in items:
        if not isinstance(x, list) or not x or isinstance(x[0], list):
            fail("expected a ground atom", x, source)
        pred = str(x[0])
        if pred not in sig.predicates or sig.predicates[pred] != len(x) - 1:
            fail(f"ill-formed ground atom {sexpr.dumps(x)}", x, source)
        for t in x[1:]:
            if isinstance(t, list) or t not in universe:
                fail(f"unknown object {sexpr.dumps(t)}", t, source)
        out.append(tuple(str(e) for e in x))
    return frozenset(out)


def parse_instance(text, domain: DomainSchema, source=None) -> Instance:
    expr = sexpr.loads(text, source)
    _head(expr, "instance", source)
    rest = list(expr[1:])
    name = "instance"
    if rest and not isinstance(rest[0], list):
        name = str(rest.pop(0))
    secs = _sections(rest, source)
    for k in secs:
        if k not in ("objects", "init", "goal"):
            fail(f"unknown instance section {k!r}", secs[k], source)
    objects = tuple(_symbols(secs["objects"][1:], source)) if "objects" in secs else ()
    sig = domain.signature
    universe = set(sig.constants) | set(objects)
    init = _ground_atoms(secs["init"][1:], sig, universe, source) if "init" in secs else frozenset()
    goal = _ground_atoms(secs["goal"][1:], sig, universe, source) if "goal" in secs else frozenset()
    try:
        return Instance(domain, objects, init, goal, name)
    except InputError as e:
        fail(str(e), expr, source)


# -- abstractions and policies ----------------------------------------------------------


_LIT_HEADS = {"gt": (True, True), "eqz": (False, True), "true": (True, False), "false": (False, False)}


def _literal(x, features, source):
    if not isinstance(x, list):
        name, positive, numeric = str(x), True, False
    elif len(x) == 2 and x[0] == "not" and not isinstance(x[1], list):
        name, positive, numeric = str(x[1]), False, False
    elif len(x) == 2 and x[0] in _LIT_HEADS and not isinstance(x[1], list):
        (positive, numeric), name = _LIT_HEADS[str(x[0])], str(x[1])
    else:
        fail("expected a literal: (gt n), (eqz n), (true X), (false X), X or (not X)", x, source)
    if name not in features:
        fail(f"unknown feature {name!r}", x, source)
    if features[name].numerical != numeric:
        kind = features[name].kind
        fail(f"literal does not fit the {kind} feature {name!r}", x, source)
    return Literal(name, positive, numeric)


def _effect(x, features, source):
    if not isinstance(x, list):
        x2 = SList([Symbol("true"), x])
    elif len(x) == 2 and x[0] == "not":
        x2 = SList([Symbol("false"), x[1]])
    else:
        x2 = x
    if not isinstance(x2, list) or len(x2) != 2 or x2[0] not in ("inc", "dec", "true", "false"):
        fail("expected an effect: (inc n), (dec n), (true X), (false X), X or (not X)", x, source)
    name = str(x2[1])
    if name not in features:
        fail(f"unknown feature {name!r}", x, source)
    numeric = x2[0] in ("inc", "dec")
    if features[name].numerical != numeric:
        fail(f"effect does not fit the {features[name].kind} feature {name!r}", x, source)
    return Effect(name, str(x2[0]))


def parse_abstraction(text, sig: Signature, source=None) -> Abstraction:
    expr = sexpr.loads(text, source)
    _head(expr, "abstraction", source)
    rest = list(expr[1:])
    name = "abstraction"
    if rest and not isinstance(rest[0], list):
        name = str(rest.pop(0))
    secs = _sections(rest, source)
    for k in secs:
        if k not in ("features", "actions", "init", "goal"):
            fail(f"unknown abstraction section {k!r}", secs[k], source)
    features = {}
    for fx in secs.get("features", [None])[1:]:
        if not isinstance(fx, list) or len(fx) != 4 or fx[0] not in ("num", "bool"):
            fail("expected (num|bool name (vars) formula)", fx, source)
        fname = str(fx[1])
        if fname in features:
            fail(f"duplicate feature {fname!r}", fx, source)
        if not isinstance(fx[2], list):
            fail("expected a variable list", fx[2], source)
        fvars = tuple(_symbols(fx[2], source, "variable"))
        for v in fvars:
            if v in sig.constants:
                fail(f"concept variable {v!r} names a constant", fx[2], source)
        formula = parse_formula(fx[3], sig, source)
        try:
            features[fname] = Feature(fname, NUMERICAL if fx[0] == "num" else BOOLEAN, fvars, formula)
        except InputError as e:
            fail(str(e), fx, source)
    actions = []
    for ax in secs.get("actions", [None])[1:]:
        if not isinstance(ax, list) or not ax or isinstance(ax[0], list):
            fail("expected (name :pre (...) :eff (...))", ax, source)
        kw = _keywords(ax[1:], source, {":pre", ":eff"})
        pre = [_literal(x, features, source) for x in kw.get(":pre", SList())]
        eff = [_effect(x, features, source) for x in kw.get(":eff", SList())]
        try:
            actions.append(AbstractAction(str(ax[0]), pre, eff))
        except InputError as e:
            fail(str(e), ax, source)

    def lits(key):
        if key not in secs:
            return ()
        body = list(secs[key][1:])
        if len(body) == 1 and isinstance(body[0], list) and (not body[0] or isinstance(body[0][0], list)):
            body = list(body[0])
        return tuple(_literal(x, features, source) for x in body)

    try:
        return Abstraction(tuple(features.values()), tuple(actions), lits("init"), lits("goal"), name)
    except InputError as e:
        fail(str(e), expr, source)


def parse_policy(text, abstraction: Abstraction, source=None) -> Policy:
    expr = sexpr.loads(text, source)
    _head(expr, "policy", source)
    features = {f.name: f for f in abstraction.features}
    names = {a.name for a in abstraction.actions}
    rules = []
    for r in expr[1:]:
        if not isinstance(r, list) or len(r) != 3 or r[0] != "rule" or not isinstance(r[1], list):
            fail("expected (rule (literals) action)", r, source)
        if r[2] not in names:
            fail(f"unknown abstract action {r[2]!r}", r[2], source)
        rules.append((tuple(_literal(x, features, source) for x in r[1]), str(r[2])))
    return Policy(tuple(rules))


def parse_formula_file(text, sig: Signature, source=None):
    return parse_formula(text, sig, source)


# -- configuration ----------------------------------------------------------------------


def load_config(path):
    """TOML configuration; currently only the ``[base]`` table is read."""
    try:
        data = tomli.loads(read_text(path))
    except tomli.TOMLDecodeError as e:
        raise InputError(f"{path}: {e}") from None
    base = data.get("base", {})
    kind = base.get("kind", "general")
    if kind not in ("general", "trivial"):
        raise InputError(f"{path}: base.kind must be 'general' or 'trivial'")
    amended = base.get("amended_star", [])
    if not isinstance(amended, list) or not all(isinstance(p, str) for p in amended):
        raise InputError(f"{path}: base.amended_star must be a list of predicate names")
    return {"base": {"kind": kind, "amended_star": list(amended)}}


def load_domain(path):
    return parse_domain(read_text(path), str(path))


def load_instance(path, domain):
    return parse_instance(read_text(path), domain, str(path))


def load_abstraction(path, sig):
    return parse_abstraction(read_text(path), sig, str(path))


def load_policy(path, abstraction):
    return parse_policy(read_text(path), abstraction, str(path))


def load_signature(path):
    return parse_signature(read_text(path), str(path))
