"""A small result record shared by the checking operations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .strips import atom_str


@dataclass
class Verdict:
    ok: bool
    verdict: str
    witness: dict | None = None
    stats: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_dict(self):
        out = {"ok": self.ok, "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.stats:
            out["stats"] = dict(self.stats)
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def describe(self):
        lines = [self.verdict]
        if self.witness:
            for k, v in _jsonable(self.witness).items():
                lines.append(f"  {k}: {v}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def state_atoms(state):
    """A state as a sorted list of ``(p a b)`` strings."""
    return [atom_str(a) for a in sorted(state)]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, frozenset):
        return state_atoms(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)
