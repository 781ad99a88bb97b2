"""Lifted STRIPS domains, grounding, and explicit state spaces.

Ground atoms are tuples ``(pred, obj, ...)`` and states are frozensets of
ground atoms. Grounding allows repeated objects in argument tuples unless
``all_different`` is requested.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .errors import BudgetExceeded, InputError, PreconditionViolation
from .fol.batch import Batch
from .fol.structure import Structure
from .fol.syntax import Atom, Const, Signature, Var, conj

DEFAULT_MAX_STATES = 200_000


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple
    pre: tuple = ()
    add: tuple = ()
    delete: tuple = ()

    def __post_init__(self):
        for attr in ("params", "pre", "add", "delete"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if len(set(self.params)) != len(self.params):
            raise InputError(f"{self.name}: repeated parameter names")
        clash = set(self.add) & set(self.delete)
        if clash:
            raise InputError(f"{self.name}: atoms both added and deleted: {sorted(map(str, clash))}")
        for a in self.pre + self.add + self.delete:
            for t in a.args:
                if isinstance(t, Var) and t.name not in self.params:
                    raise InputError(f"{self.name}: {t.name!r} is neither a parameter nor a constant")

    def precondition(self):
        """``Pre(a(z))`` as a formula over the parameters."""
        return conj(*self.pre)

    def adds(self, pred):
        return [a for a in self.add if a.pred == pred]

    def deletes(self, pred):
        return [a for a in self.delete if a.pred == pred]

    def __str__(self):
        return f"{self.name}({','.join(self.params)})"


@dataclass(frozen=True)
class DomainSchema:
    signature: Signature
    schemas: tuple
    name: str = "domain"

    def __post_init__(self):
        object.__setattr__(self, "schemas", tuple(self.schemas))
        names = [s.name for s in self.schemas]
        if len(set(names)) != len(names):
            raise InputError("duplicate action schema names")
        sig = self.signature
        for s in self.schemas:
            for a in s.pre + s.add + s.delete:
                if a.pred not in sig.predicates:
                    raise InputError(f"{s.name}: unknown predicate {a.pred!r}")
                if sig.predicates[a.pred] != len(a.args):
                    raise InputError(f"{s.name}: {a.pred} expects {sig.predicates[a.pred]} arguments")
                for t in a.args:
                    if isinstance(t, Const) and t.name not in sig.constants:
                        raise InputError(f"{s.name}: unknown constant {t.name!r}")
            clash = set(s.params) & set(sig.constants)
            if clash:
                raise InputError(f"{s.name}: parameters shadow constants {sorted(clash)}")

    def schema(self, name):
        for s in self.schemas:
            if s.name == name:
                return s
        raise InputError(f"unknown action schema {name!r}")


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: tuple
    pre: frozenset = field(compare=False, repr=False, default=frozenset())
    add: frozenset = field(compare=False, repr=False, default=frozenset())
    delete: frozenset = field(compare=False, repr=False, default=frozenset())

    def __str__(self):
        return f"{self.schema}({','.join(self.args)})"


@dataclass(frozen=True)
class Instance:
    domain: DomainSchema
    objects: tuple
    init: frozenset
    goal: frozenset
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "init", frozenset(map(tuple, self.init)))
        object.__setattr__(self, "goal", frozenset(map(tuple, self.goal)))
        sig = self.domain.signature
        clash = set(self.objects) & set(sig.constants)
        if clash:
            raise InputError(f"objects duplicate domain constants: {sorted(clash)}")
        if len(set(self.objects)) != len(self.objects):
            raise InputError("duplicate object names")
        universe = set(self.universe)
        for atom in self.init | self.goal:
            p, args = atom[0], atom[1:]
            if p not in sig.predicates or sig.predicates[p] != len(args):
                raise InputError(f"ill-formed ground atom {atom_str(atom)}")
            if not universe.issuperset(args):
                raise InputError(f"ground atom {atom_str(atom)} uses unknown objects")

    @property
    def universe(self):
        return tuple(self.domain.signature.constants) + self.objects

    @property
    def signature(self):
        return self.domain.signature

    def is_goal(self, state):
        return self.goal <= state

    def vocabulary(self):
        """Every ground atom over the instance universe, in a fixed order."""
        out = []
        for p, k in self.signature.predicates.items():
            out.extend((p, *args) for args in itertools.product(self.universe, repeat=k))
        return out


def atom_str(atom):
    return "(" + " ".join(atom) + ")"


def state_str(state):
    return "{" + " ".join(atom_str(a) for a in sorted(state)) + "}"


def _ground_atoms(atoms, sub):
    return frozenset(
        (a.pred, *(sub[t.name] if isinstance(t, Var) else t.name for t in a.args)) for a in atoms
    )


def instantiate(schema: ActionSchema, args) -> GroundAction:
    args = tuple(args)
    if len(args) != len(schema.params):
        raise InputError(f"{schema.name} expects {len(schema.params)} arguments, got {len(args)}")
    sub = dict(zip(schema.params, args))
    return GroundAction(
        schema.name,
        args,
        _ground_atoms(schema.pre, sub),
        _ground_atoms(schema.add, sub),
        _ground_atoms(schema.delete, sub),
    )


def ground(inst: Instance, all_different=False) -> list:
    """All ground actions in lexicographic order (schema order, then argument tuples)."""
    out = []
    for s in inst.domain.schemas:
        gen = (
            itertools.permutations(inst.universe, len(s.params))
            if all_different
            else itertools.product(inst.universe, repeat=len(s.params))
        )
        out.extend(instantiate(s, args) for args in gen)
    return out


def applicable(state, action: GroundAction) -> bool:
    return action.pre <= state


def res(state, action: GroundAction) -> frozenset:
    """``(s \\ del) | add``; raises :class:`PreconditionViolation` if inapplicable."""
    if not applicable(state, action):
        missing = sorted(action.pre - state)
        raise PreconditionViolation(f"{action} is not applicable: missing {', '.join(map(atom_str, missing))}")
    return (frozenset(state) - action.delete) | action.add


@dataclass
class StateSpace:
    """States in BFS order and transitions ``(i, action, j)`` between their indices."""

    instance: Instance
    states: list
    transitions: list
    index: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def __contains__(self, state):
        return state in self.index

    def successors(self, i):
        return [(a, j) for (k, a, j) in self.transitions if k == i]


def reachable(inst: Instance, max_states=DEFAULT_MAX_STATES, actions=None, all_different=False) -> StateSpace:
    """Breadth-first enumeration of the states reachable from ``inst.init``."""
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    actions = ground(inst, all_different) if actions is None else actions
    init = inst.init
    states, index = [init], {init: 0}
    transitions = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = states[i]
        for a in actions:
            if not a.pre <= s:
                continue
            t = (s - a.delete) | a.add
            j = index.get(t)
            if j is None:
                if len(states) >= max_states:
                    raise BudgetExceeded("max_states", max_states)
                j = len(states)
                index[t] = j
                states.append(t)
                queue.append(j)
            transitions.append((i, a, j))
    return StateSpace(inst, states, transitions, index)


def all_states(inst: Instance, max_states=DEFAULT_MAX_STATES):
    """Every subset of the ground-atom vocabulary (reachable or not)."""
    vocab = inst.vocabulary()
    if 2 ** len(vocab) > max_states:
        raise BudgetExceeded("max_states", max_states)
    for bits in itertools.product((False, True), repeat=len(vocab)):
        yield frozenset(a for a, b in zip(vocab, bits) if b)


def to_structure(inst: Instance, state) -> Structure:
    return Structure.from_atoms(inst.universe, state, inst.signature)


def to_batch(inst: Instance, states) -> Batch:
    """Stack states of ``inst`` into a :class:`~qnpsynth.fol.batch.Batch`."""
    import numpy as np

    universe = inst.universe
    pos = {o: i for i, o in enumerate(universe)}
    n, B = len(universe), len(states)
    rels = {p: np.zeros((B,) + (n,) * k, dtype=bool) for p, k in inst.signature.predicates.items()}
    for b, s in enumerate(states):
        for atom in s:
            rels[atom[0]][(b,) + tuple(pos[o] for o in atom[1:])] = True
    consts = {c: pos[c] for c in inst.signature.constants}
    return Batch(universe, rels, consts, B)


def apply_to_batch(batch: Batch, action: GroundAction, universe) -> Batch:
    """Successor batch under ``action`` (applicability is not checked)."""
    pos = {o: i for i, o in enumerate(universe)}
    rels = {p: arr.copy() for p, arr in batch.relations.items()}
    for atom in action.delete - action.add:
        rels[atom[0]][(slice(None),) + tuple(pos[o] for o in atom[1:])] = False
    for atom in action.add:
        rels[atom[0]][(slice(None),) + tuple(pos[o] for o in atom[1:])] = True
    return Batch(batch.objects, rels, batch.constants, batch.size)


def applicable_mask(batch: Batch, action: GroundAction, universe):
    import numpy as np

    pos = {o: i for i, o in enumerate(universe)}
    mask = np.ones(batch.size, dtype=bool)
    for atom in action.pre:
        mask &= batch.relations[atom[0]][(slice(None),) + tuple(pos[o] for o in atom[1:])]
    return mask


def ground_atom(pred, *args):
    return (pred, *args)


def lifted_atom(pred, *names, constants=()):
    return Atom(pred, tuple(Const(n) if n in constants else Var(n) for n in names))
