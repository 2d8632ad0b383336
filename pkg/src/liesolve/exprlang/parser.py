"""Recursive-descent parser for the potential/volatility expression grammar.

Precedence (tightest first): ``^``, unary minus, ``* /``, ``+ -``; all binary
operators associate to the left; parentheses override.  ``x^-2`` needs
parentheses (``x^(-2)``) because ``^`` binds tighter than unary minus.
"""

from __future__ import annotations

import re

from ..errors import ExprSyntaxError
from .ast import VARIABLES, Bin, Call, Neg, Num, Param, Var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

MAX_SOURCE = 64 * 1024


class _Tokens:
    def __init__(self, src):
        if len(src.encode("utf-8")) > MAX_SOURCE:
            raise ExprSyntaxError("source exceeds 64 KiB", 0)
        self.src = src
        self.toks = []
        pos = 0
        while pos < len(src):
            m = _TOKEN_RE.match(src, pos)
            if m is None:
                raise ExprSyntaxError(
                    f"unexpected character {src[pos]!r}", pos, {"number", "identifier", "operator"}
                )
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.toks.append(("end", "", len(src)))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op):
        kind, text, pos = self.peek()
        if kind == "op" and text == op:
            return self.next()
        raise ExprSyntaxError(f"expected {op!r}", pos, {op})


def parse(src):
    """Parse a source string into an AST; raises ExprSyntaxError with the
    byte offset and expected-token set on malformed input."""
    ts = _Tokens(src)
    e = _expr(ts)
    kind, text, pos = ts.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected trailing input {text!r}", pos, {"end of input"})
    return e


def _expr(ts):
    node = _term(ts)
    while True:
        kind, text, _ = ts.peek()
        if kind == "op" and text in "+-":
            ts.next()
            node = Bin(text, node, _term(ts))
        else:
            return node


def _term(ts):
    node = _factor(ts)
    while True:
        kind, text, _ = ts.peek()
        if kind == "op" and text in "*/":
            ts.next()
            node = Bin(text, node, _factor(ts))
        else:
            return node


def _factor(ts):
    kind, text, _ = ts.peek()
    if kind == "op" and text == "-":
        ts.next()
        return Neg(_factor(ts))
    return _power(ts)


def _power(ts):
    node = _atom(ts)
    while True:
        kind, text, _ = ts.peek()
        if kind == "op" and text == "^":
            ts.next()
            node = Bin("^", node, _atom(ts))
        else:
            return node


def _atom(ts):
    kind, text, pos = ts.next()
    if kind == "number":
        return Num(float(text))
    if kind == "ident":
        name = text
        prime = 0
        while name.endswith("_prime"):
            name = name[: -len("_prime")]
            prime += 1
        k, t, _ = ts.peek()
        if k == "op" and t == "(":
            ts.next()
            arg = _expr(ts)
            ts.expect_op(")")
            if name in VARIABLES and prime == 0:
                raise ExprSyntaxError(f"variable {name} is not callable", pos, {"operator"})
            return Call(name, arg, prime=prime)
        if prime:
            raise ExprSyntaxError(f"derivative symbol {text} must be applied", pos, {"("})
        if name in VARIABLES:
            return Var(name)
        return Param(name)
    if kind == "op" and text == "(":
        e = _expr(ts)
        ts.expect_op(")")
        return e
    expected = {"number", "identifier", "("}
    if kind == "end":
        raise ExprSyntaxError("incomplete expression", pos, expected)
    raise ExprSyntaxError(f"unexpected token {text!r}", pos, expected)
