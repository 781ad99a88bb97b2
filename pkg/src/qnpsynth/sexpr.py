"""Minimal S-expression reader that keeps source positions for error messages."""

from __future__ import annotations

from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message, line=None, col=None, source=None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        where = ""
        if line is not None:
            where = f"{source + ':' if source else ''}{line}:{col}: "
        super().__init__(where + message)


class Symbol(str):
    """A string atom carrying its (line, col) position."""

    line: int = 0
    col: int = 0

    def __new__(cls, value, line=0, col=0):
        s = super().__new__(cls, value)
        s.line = line
        s.col = col
        return s


class SList(list):
    line: int = 0
    col: int = 0


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text, source):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield _Tok(ch, line, col)
            i += 1
            col += 1
        else:
            start, scol = i, col
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            yield _Tok(text[start:i], line, scol)


def loads_all(text, source=None):
    """Parse every top-level expression in ``text``."""
    stack = [SList()]
    for tok in _tokenize(text, source):
        if tok.text == "(":
            lst = SList()
            lst.line, lst.col = tok.line, tok.col
            stack.append(lst)
        elif tok.text == ")":
            if len(stack) == 1:
                raise ParseError("unexpected ')'", tok.line, tok.col, source)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(Symbol(tok.text, tok.line, tok.col))
    if len(stack) > 1:
        lst = stack[-1]
        raise ParseError("unclosed '('", lst.line, lst.col, source)
    return list(stack[0])


def loads(text, source=None):
    """Parse exactly one top-level expression."""
    exprs = loads_all(text, source)
    if len(exprs) != 1:
        raise ParseError(f"expected one expression, found {len(exprs)}", 1, 1, source)
    return exprs[0]


def position(x):
    return getattr(x, "line", None), getattr(x, "col", None)


def fail(message, at=None, source=None):
    line, col = position(at) if at is not None else (None, None)
    raise ParseError(message, line, col, source)


def dumps(x):
    if isinstance(x, (list, tuple)):
        return "(" + " ".join(dumps(e) for e in x) + ")"
    return str(x)
