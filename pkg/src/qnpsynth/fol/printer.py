"""Rendering formulas as S-expressions and as compact infix text."""

from __future__ import annotations

from .syntax import (
    PLUS,
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
)


def to_sexpr(f) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return "(" + " ".join([f.pred, *map(str, f.args)]) + ")"
    if isinstance(f, Closure):
        op = "+" if f.kind == PLUS else "*"
        return f"({f.pred}{op} {f.left} {f.right})"
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(map(to_sexpr, f.args)) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(map(to_sexpr, f.args)) + ")"
    if isinstance(f, Implies):
        return f"(implies {to_sexpr(f.left)} {to_sexpr(f.right)})"
    if isinstance(f, Exists):
        return f"(exists ({' '.join(f.vars)}) {to_sexpr(f.body)})"
    if isinstance(f, Forall):
        return f"(forall ({' '.join(f.vars)}) {to_sexpr(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


_PREC = {Implies: 1, Or: 2, And: 3}


def to_infix(f, _ctx=0) -> str:
    """Readable one-line rendering, e.g. ``Ey(on(x,y) & on*(y,A))``."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bottom):
        return "F"
    if isinstance(f, Atom):
        return f"{f.pred}({','.join(map(str, f.args))})"
    if isinstance(f, Closure):
        op = "+" if f.kind == PLUS else "*"
        return f"{f.pred}{op}({f.left},{f.right})"
    if isinstance(f, Eq):
        return f"{f.left}={f.right}"
    if isinstance(f, Not):
        if isinstance(f.arg, Eq):
            return f"{f.arg.left}!={f.arg.right}"
        return "~" + to_infix(f.arg, 4)
    if isinstance(f, (Exists, Forall)):
        q = "E" if isinstance(f, Exists) else "A"
        return f"{q}{''.join(f.vars) if all(len(v) == 1 for v in f.vars) else ','.join(f.vars)}[{to_infix(f.body)}]"
    prec = _PREC[type(f)]
    if isinstance(f, Implies):
        s = f"{to_infix(f.left, prec + 1)} => {to_infix(f.right, prec)}"
    else:
        sep = " & " if isinstance(f, And) else " | "
        s = sep.join(to_infix(a, prec + 1) for a in f.args)
    return f"({s})" if prec < _ctx else s
