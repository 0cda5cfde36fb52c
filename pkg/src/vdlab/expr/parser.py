"""Infix text grammar for expressions.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom (('^' | '**') ['-'] INT)?
    atom    := NUMBER ['i'] | 'i' | 'z' | 'pi' | 'e' | NAME
             | 'exp' '(' expr ')' | '(' expr ')'

NAME refers to a binding supplied by the caller (typically a polynomial
such as ``P`` declared in an equation file).  ``2z`` and ``3(z+1)`` are
read as implicit products.
"""
from __future__ import annotations

import re

import numpy as np

from ..errors import NotMeromorphic, ParseError
from . import nodes as N

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos, self.text)

    def parse(self):
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", pos, self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while True:
            kind, v, pos = self.peek()
            if v in ("*", "/"):
                self.take()
                rhs = self.unary()
                if v == "/" and rhs == N.ZERO:
                    raise ParseError("division by zero", pos, self.text)
                e = e * rhs if v == "*" else e / rhs
            elif kind in ("num", "name") or v == "(":
                # implicit product, e.g. 2z or 3(z+1)
                e = e * self.power()
            else:
                return e

    def unary(self):
        v = self.peek()[1]
        if v in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if v == "+" else -inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, v, pos = self.take()
            if kind != "num" or not re.fullmatch(r"\d+", v):
                raise ParseError("exponent must be an integer literal", pos, self.text)
            return N.power(base, sign * int(v))
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            val = float(v)
            nk, nv, npos = self.peek()
            if nk == "name" and nv == "i" and npos == pos + len(v):
                self.take()
                return N.const(1j * val)
            return N.const(val)
        if kind == "name":
            if v == "z":
                return N.Z
            if v == "i":
                return N.const(1j)
            if v == "pi":
                return N.const(np.pi)
            if v == "e" and self.peek()[1] != "(":
                return N.const(np.e)
            if v == "exp":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                try:
                    return N.exp(arg)
                except NotMeromorphic as exc:
                    raise ParseError(str(exc), pos, self.text) from exc
            if v in self.names:
                return self.names[v]
            raise ParseError(f"unknown name {v!r}", pos, self.text)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {v or 'end of input'!r}", pos, self.text)


def parse(text: str, names: dict | None = None) -> N.ComplexFunc:
    """Parse ``text`` into an expression; ``names`` binds extra identifiers."""
    bound = {k: N.as_func(v) for k, v in (names or {}).items()}
    if not text or not text.strip():
        raise ParseError("empty expression", 0, text)
    return _Parser(text, bound).parse()
