"""Exact symbolic differentiation of expression ASTs.

Simplification is deliberately limited to constant folding and zero/one
elimination; this is a differentiation engine, not a computer-algebra system.
``r_polar`` and ``theta`` are treated as the usual functions of (x, y), so a
polar-form potential can still be differentiated in cartesian directions.
"""

from __future__ import annotations

from ..errors import UnsupportedDerivative
from .ast import Bin, Call, Neg, Num, Param, Var

_DIFF_VARS = ("x", "y", "t", "S")


def _is_num(e, v=None):
    return isinstance(e, Num) and (v is None or e.value == v)


def add(a, b):
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def sub(a, b):
    if _is_num(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_num(a, 0):
        return neg(b)
    return Bin("-", a, b)


def mul(a, b):
    if _is_num(a, 0) or _is_num(b, 0):
        return Num(0.0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def div(a, b):
    if _is_num(a, 0):
        return Num(0.0)
    if _is_num(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return Bin("/", a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def powe(a, b):
    if _is_num(b, 1):
        return a
    if _is_num(b, 0):
        return Num(1.0)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value**b.value)
    return Bin("^", a, b)


# chain-rule factors for the polar helper variables
_POLAR_CHAIN = {
    ("r_polar", "x"): lambda: div(Var("x"), Var("r_polar")),
    ("r_polar", "y"): lambda: div(Var("y"), Var("r_polar")),
    ("theta", "x"): lambda: neg(div(Var("y"), powe(Var("r_polar"), Num(2.0)))),
    ("theta", "y"): lambda: div(Var("x"), powe(Var("r_polar"), Num(2.0))),
}


def differentiate(e, var):
    """d e / d var with var in {x, y, t, S}."""
    if var not in _DIFF_VARS:
        raise UnsupportedDerivative(
            f"differentiation direction must be one of {_DIFF_VARS}, got {var!r}"
        )

    def d(n):
        if isinstance(n, Num) or isinstance(n, Param):
            return Num(0.0)
        if isinstance(n, Var):
            if n.name == var:
                return Num(1.0)
            chain = _POLAR_CHAIN.get((n.name, var))
            if chain is not None:
                return chain()
            return Num(0.0)
        if isinstance(n, Neg):
            return neg(d(n.operand))
        if isinstance(n, Bin):
            a, b = n.left, n.right
            da, db = d(a), d(b)
            if n.op == "+":
                return add(da, db)
            if n.op == "-":
                return sub(da, db)
            if n.op == "*":
                return add(mul(da, b), mul(a, db))
            if n.op == "/":
                return sub(div(da, b), div(mul(a, db), powe(b, Num(2.0))))
            if n.op == "^":
                if isinstance(b, Num):
                    # d(a^c) = c a^(c-1) a'
                    return mul(mul(b, powe(a, Num(b.value - 1.0))), da)
                if _is_num(da, 0) and isinstance(a, Num):
                    # d(c^b) = c^b ln(c) b'
                    return mul(mul(n, Call("ln", a)), db)
                # general a^b = exp(b ln a)
                inner = add(mul(db, Call("ln", a)), mul(b, div(da, a)))
                return mul(n, inner)
        if isinstance(n, Call):
            darg = d(n.arg)
            if _is_num(darg, 0):
                return Num(0.0)
            if n.opaque:
                return mul(Call(n.fn, n.arg, prime=n.prime + 1), darg)
            z = n.arg
            if n.fn == "exp":
                outer = n
            elif n.fn == "ln":
                outer = div(Num(1.0), z)
            elif n.fn == "sin":
                outer = Call("cos", z)
            elif n.fn == "cos":
                outer = neg(Call("sin", z))
            elif n.fn == "sqrt":
                outer = div(Num(0.5), n)
            elif n.fn == "arctan":
                outer = div(Num(1.0), add(Num(1.0), powe(z, Num(2.0))))
            else:  # pragma: no cover
                raise UnsupportedDerivative(f"unknown function {n.fn}")
            return mul(outer, darg)
        raise TypeError(f"not an Expr: {n!r}")

    return d(e)
