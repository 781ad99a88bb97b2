"""Bounded brute-force semantic equivalence.

This is an oracle, not a decision procedure: two formulas are reported
equivalent when they agree on every structure with at most ``max_universe``
objects under every binding of their free variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batch import enumerate_packed, evaluate_batch, structure_at
from .structure import Structure
from .syntax import Signature, check_formula, conj, free_vars, predicates_used

DEFAULT_MAX_UNIVERSE = 4


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    bound: int
    structures_checked: int
    counterexample: Structure | None = None
    binding: dict | None = None
    values: tuple | None = None

    def __bool__(self):
        return self.equivalent

    def describe(self):
        if self.equivalent:
            return f"equivalent up to {self.bound} objects ({self.structures_checked} structures)"
        atoms = " ".join("(" + " ".join(a) + ")" for a in self.counterexample.atoms())
        bind = ", ".join(f"{k}={v}" for k, v in self.binding.items())
        return (
            f"counterexample over {len(self.counterexample.universe)} objects "
            f"{{{atoms}}} with [{bind}]: first={self.values[0]} second={self.values[1]}"
        )


def semantically_equivalent(
    f1, f2, sig: Signature, max_universe=DEFAULT_MAX_UNIVERSE, chunk=1 << 12
) -> EquivalenceVerdict:
    """First counterexample in enumeration order, or equivalent-up-to-bound.

    Structures are enumerated by universe size, then by the bit order of
    :func:`~qnpsynth.fol.batch.enumerate_batches`; bindings lexicographically
    over the sorted free variables.
    """
    if max_universe < 1:
        raise ValueError("max_universe must be at least 1")
    check_formula(f1, sig)
    check_formula(f2, sig)
    free = tuple(sorted(free_vars(f1) | free_vars(f2)))
    preds = predicates_used(f1) | predicates_used(f2)
    lo_size = max(1, len(sig.constants))
    if lo_size > max_universe:
        raise ValueError(
            f"bound {max_universe} is below the number of constants ({len(sig.constants)})"
        )
    checked = 0
    for n in range(lo_size, max_universe + 1):
        for lo, batch, valid in enumerate_packed(sig, n, preds, chunk=chunk):
            a = evaluate_batch(f1, batch, free)
            b = evaluate_batch(f2, batch, free)
            diff = ((a ^ b) & valid).reshape(batch.size, -1)
            per_word = np.bitwise_or.reduce(diff, axis=1)
            bad = np.flatnonzero(per_word)
            count = min(batch.size * 64, _popcount_mask(valid) * batch.size)
            if bad.size:
                w = int(bad[0])
                word = int(per_word[w])
                bit = (word & -word).bit_length() - 1
                column = (diff[w] >> np.uint64(bit)) & np.uint64(1)
                flat = int(np.flatnonzero(column)[0])
                pos = np.unravel_index(flat, (n,) * len(free)) if free else ()
                binding = {v: batch.objects[int(i)] for v, i in zip(free, pos)}
                index = (lo + w) * 64 + bit
                st = structure_at(sig, n, batch.relations, index)
                va = bool((int(a.reshape(batch.size, -1)[w, flat if a.size > batch.size else 0]) >> bit) & 1)
                return EquivalenceVerdict(False, max_universe, checked + w * 64 + bit + 1, st, binding, (va, not va))
            checked += count
    return EquivalenceVerdict(True, max_universe, checked)


def equivalent_under(assumption, f1, f2, sig, max_universe=DEFAULT_MAX_UNIVERSE):
    """Equivalence of ``assumption & f1`` and ``assumption & f2``."""
    return semantically_equivalent(conj(assumption, f1), conj(assumption, f2), sig, max_universe)


def _popcount_mask(valid):
    return bin(int(valid)).count("1")
