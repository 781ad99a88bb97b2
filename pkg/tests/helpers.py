"""Shared builders for verification tests."""

import dataclasses

from qnpsynth import corpus
from qnpsynth.fol import parse_formula
from qnpsynth.synthesis import synthesize_sufficient

# Psi for Newtower without the uniqueness conjunct over y
WEAK_NEWTOWER = "(and (clear z1) (on z1 z2) (on* z2 A))"


def corrupted_blocks_guarantee():
    d, q = corpus.domain("blocks"), corpus.abstraction("blocks")
    g = synthesize_sufficient(q, d)
    weak = parse_formula(WEAK_NEWTOWER, d.signature)
    entry = g["dec-n"]
    disjuncts = [dataclasses.replace(dj, formula=weak) if dj.schema == "Newtower" else dj for dj in entry.disjuncts]
    entries = dict(g.entries)
    entries["dec-n"] = dataclasses.replace(entry, disjuncts=disjuncts)
    return dataclasses.replace(g, entries=entries)


def small_state_sets(inst, limit=1 << 16):
    """Reachable states, plus every state when the vocabulary is small enough."""
    from qnpsynth.strips import all_states, reachable

    states = list(reachable(inst).states)
    if len(inst.vocabulary()) <= limit.bit_length() - 1:
        seen = set(states)
        states += [s for s in all_states(inst, limit) if s not in seen]
    return states
