"""Bundled domains, abstractions, instances, policies and reference formulas.

Gripper's schema atoms are a reconstruction from the predicate descriptions
(preconditions, add and delete lists are not given in the source material).
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from importlib import resources

from ..fol.parser import parse_formula
from ..io import parse_abstraction, parse_domain, parse_instance, parse_policy
from ..strips import Instance

DOMAINS = {"blocks": "blocks.dom", "gripper": "gripper.dom", "graph": "graph.dom"}
ABSTRACTIONS = {"blocks": "clear.abs", "gripper": "gripper.abs", "graph": "conn.abs"}


def path(name):
    """Filesystem path of a bundled file (usable from the command line)."""
    return resources.files(__name__).joinpath(name)


def text(name):
    return path(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def domain(key):
    return parse_domain(text(DOMAINS[key]), DOMAINS[key])


@lru_cache(maxsize=None)
def abstraction(key):
    return parse_abstraction(text(ABSTRACTIONS[key]), domain(key).signature, ABSTRACTIONS[key])


@lru_cache(maxsize=None)
def instance(name, key=None):
    key = key or _domain_of(name)
    fname = name if name.endswith(".inst") else f"{name}.inst"
    return parse_instance(text(fname), domain(key), fname)


def policy(name, key):
    fname = name if name.endswith(".pol") else f"{name}.pol"
    return parse_policy(text(fname), abstraction(key), fname)


def _domain_of(name):
    if name.startswith(("tower", "circular")):
        return "blocks"
    if name.startswith("gripper"):
        return "gripper"
    if name.startswith("g"):
        return "graph"
    raise KeyError(name)


# -- generated Blocksworld instances ------------------------------------------------------


def _towers(blocks):
    """Every arrangement of ``blocks`` into towers (bottom first), canonical order."""
    blocks = list(blocks)
    if not blocks:
        yield []
        return
    for k in range(1, len(blocks) + 1):
        for perm in itertools.permutations(blocks):
            # split into k non-empty ordered towers; keep towers sorted by bottom block
            for cuts in itertools.combinations(range(1, len(blocks)), k - 1):
                bounds = (0,) + cuts + (len(blocks),)
                towers = [list(perm[bounds[i] : bounds[i + 1]]) for i in range(k)]
                bottoms = [t[0] for t in towers]
                if bottoms == sorted(bottoms):
                    yield towers


def tower_state(towers):
    atoms = set()
    for t in towers:
        atoms.add(("ontable", t[0]))
        atoms.add(("clear", t[-1]))
        atoms.update(("on", upper, lower) for lower, upper in zip(t, t[1:]))
    return frozenset(atoms)


def blocks_instances(max_extra=3, goal=(("clear", "A"),), only_nonzero=True):
    """Every table-grounded configuration of ``A`` plus up to ``max_extra`` blocks.

    With ``only_nonzero`` set, configurations without a block above ``A`` are skipped.
    """
    dom = domain("blocks")
    out = []
    for k in range(0, max_extra + 1):
        objects = tuple(f"B{i}" for i in range(1, k + 1))
        for towers in _towers(("A",) + objects):
            tower_a = next(t for t in towers if "A" in t)
            if only_nonzero and tower_a[-1] == "A":
                continue
            desc = "|".join("/".join(t) for t in towers)
            out.append(Instance(dom, objects, tower_state(towers), frozenset(goal), f"blocks[{desc}]"))
    return out


def stacked_tower(k, goal=(("clear", "A"),)):
    """``k`` blocks stacked on ``A``."""
    objects = tuple(f"B{i}" for i in range(1, k + 1))
    return Instance(domain("blocks"), objects, tower_state([["A", *objects]]), frozenset(goal), f"tower{k}")


def gripper_instance(balls, grippers=("l", "r"), robot="B"):
    dom = domain("gripper")
    bs = tuple(f"b{i}" for i in range(1, balls + 1))
    init = {("room", "A"), ("room", "B"), ("at", robot)}
    init |= {("fr", g) for g in grippers} | {("in", b, "B") for b in bs}
    goal = {("in", b, "A") for b in bs}
    return Instance(dom, tuple(grippers) + bs, frozenset(init), frozenset(goal), f"gripper-{len(grippers)}-{balls}")


def graph_instance(extra=(), init=(), goal=()):
    return Instance(domain("graph"), tuple(extra), frozenset(init), frozenset(goal), f"graph{2 + len(extra)}")


# -- reference formulas -------------------------------------------------------------------

GOLDEN = {
    "blocks": {
        # necessary condition for Psi(x) after Newtower(z1, z2)
        "N_newtower": "(exists (y) (and (on x y) (on* y A) (not (and (= x z1) (= y z2)))))",
        "N_move": """(or (and (on* x z3) (on* z5 A))
                         (and (on+ x A) (!= x z3))
                         (exists (y) (and (on x y) (on* y A) (!= y z4))))""",
        "S_dec_newtower": """(and (on z1 z2) (on* z2 A)
                                  (forall (y) (implies (and (on z1 y) (on* y A)) (= y z2))))""",
        "S_dec_move": """(and (on+ z3 A) (not (on* z5 A))
                              (forall (y) (implies (and (on z3 y) (on* y A)) (= y z4))))""",
        "Psi_Newtower": """(and (clear z1) (on z1 z2) (on* z2 A)
                                (forall (y) (implies (and (on z1 y) (on* y A)) (= y z2))))""",
        "Psi_Move": """(and (clear z3) (on z3 z4) (clear z5) (on+ z3 A) (not (on* z5 A))
                            (forall (y) (implies (and (on z3 y) (on* y A)) (= y z4))))""",
        "pre_n": "(exists (x) (on+ x A))",
    },
    "gripper": {
        # listed without the schema preconditions; compare modulo those
        ("pick", "Pick"): "(and (forall (x) (not (ca b x))) (!= r A))",
        ("drop", "Drop"): "(and (at A) (not (fr g)) (or (= r A) (exists (x) (and (in b x) (!= x A)))))",
        ("go1", "Move"): """(and (exists (x y) (ca x y)) (exists (x) (fr x))
                                 (forall (x y) (implies (in x y) (= y A)))
                                 (!= r1 A) (= r2 A))""",
        ("go2", "Move"): "(and (exists (x y) (ca x y)) (forall (x) (not (fr x))) (!= r1 A) (= r2 A))",
        ("leave", "Move"): "(and (forall (x y) (not (ca x y))) (exists (x) (fr x)) (= r1 A) (!= r2 A))",
    },
    "graph": {
        "sufficient": """(exists (z1 z2) (and (not (E z1 z2))
                                              (implies (and (E* s z1) (E* z2 t)) (E* s t))))""",
        "necessary_unamended": "(exists (z1 z2) (not (E z1 z2)))",
    },
}


def golden(key, name):
    return parse_formula(GOLDEN[key][name], domain(key).signature)
