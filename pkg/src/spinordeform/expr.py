"""Small arithmetic expression language over the chart coordinates x0..x3.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x0' | 'x1' | 'x2' | 'x3'
            | ('exp' | 'sin' | 'cos' | 'sqrt') '(' expr ')'
            | '(' expr ')'

``^`` is right associative and binds tighter than unary minus, so ``-x0^2``
is ``-(x0^2)``.  Parsed trees evaluate at a point and differentiate
symbolically, which is how scenario files get exact frame derivatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["ExpressionError", "Node", "parse", "parse_matrix"]


class ExpressionError(ValueError):
    def __init__(self, message: str, source: str = "", position: int | None = None):
        self.source = source
        self.position = position
        if position is not None:
            message = f"{message} at column {position}: {source!r}"
        super().__init__(message)


class Node:
    """Base class of expression trees.  Trees are immutable."""

    def eval(self, x) -> float:
        raise NotImplementedError

    def diff(self, var: int) -> "Node":
        raise NotImplementedError

    def is_const(self) -> bool:
        return False

    def __call__(self, x) -> float:
        return self.eval(x)


@dataclass(frozen=True)
class Const(Node):
    value: float

    def eval(self, x):
        return self.value

    def diff(self, var):
        return ZERO

    def is_const(self):
        return True

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    index: int

    def eval(self, x):
        return x[self.index]

    def diff(self, var):
        return ONE if var == self.index else ZERO

    def __str__(self):
        return f"x{self.index}"


ZERO = Const(0.0)
ONE = Const(1.0)


def _const(node: Node, value: float) -> bool:
    return isinstance(node, Const) and node.value == value


def add(a: Node, b: Node) -> Node:
    if a.is_const() and b.is_const():
        return Const(a.value + b.value)
    if _const(a, 0.0):
        return b
    if _const(b, 0.0):
        return a
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if a.is_const() and b.is_const():
        return Const(a.value - b.value)
    if _const(b, 0.0):
        return a
    if _const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    if a.is_const() and b.is_const():
        return Const(a.value * b.value)
    if _const(a, 0.0) or _const(b, 0.0):
        return ZERO
    if _const(a, 1.0):
        return b
    if _const(b, 1.0):
        return a
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if _const(b, 0.0):
        return Div(a, b)
    if _const(a, 0.0):
        return ZERO
    if _const(b, 1.0):
        return a
    if a.is_const() and b.is_const() and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def neg(a: Node) -> Node:
    if a.is_const():
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Node, b: Node) -> Node:
    if _const(b, 1.0):
        return a
    if _const(b, 0.0):
        return ONE
    return Pow(a, b)


@dataclass(frozen=True)
class Add(Node):
    a: Node
    b: Node

    def eval(self, x):
        return self.a.eval(x) + self.b.eval(x)

    def diff(self, var):
        return add(self.a.diff(var), self.b.diff(var))

    def __str__(self):
        return f"({self.a} + {self.b})"


@dataclass(frozen=True)
class Sub(Node):
    a: Node
    b: Node

    def eval(self, x):
        return self.a.eval(x) - self.b.eval(x)

    def diff(self, var):
        return sub(self.a.diff(var), self.b.diff(var))

    def __str__(self):
        return f"({self.a} - {self.b})"


@dataclass(frozen=True)
class Mul(Node):
    a: Node
    b: Node

    def eval(self, x):
        return self.a.eval(x) * self.b.eval(x)

    def diff(self, var):
        return add(mul(self.a.diff(var), self.b), mul(self.a, self.b.diff(var)))

    def __str__(self):
        return f"({self.a} * {self.b})"


@dataclass(frozen=True)
class Div(Node):
    a: Node
    b: Node

    def eval(self, x):
        den = self.b.eval(x)
        if den == 0.0:
            return math.nan
        return self.a.eval(x) / den

    def diff(self, var):
        num = sub(mul(self.a.diff(var), self.b), mul(self.a, self.b.diff(var)))
        return div(num, mul(self.b, self.b))

    def __str__(self):
        return f"({self.a} / {self.b})"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def eval(self, x):
        return -self.arg.eval(x)

    def diff(self, var):
        return neg(self.arg.diff(var))

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class Pow(Node):
    a: Node
    b: Node

    def eval(self, x):
        try:
            out = self.a.eval(x) ** self.b.eval(x)
        except (ZeroDivisionError, OverflowError):
            return math.nan
        # negative base with a fractional exponent has no real value
        return math.nan if isinstance(out, complex) else out

    def diff(self, var):
        da = self.a.diff(var)
        if self.b.is_const():
            n = self.b.value
            return mul(mul(Const(n), power(self.a, Const(n - 1.0))), da)
        # d(a^b) = a^b (b' ln a + b a'/a)
        db = self.b.diff(var)
        inner = add(mul(db, Func("log", self.a)), div(mul(self.b, da), self.a))
        return mul(self, inner)

    def __str__(self):
        return f"({self.a} ^ {self.b})"


_FUNCS = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    # internal only: produced by Pow.diff, not accepted by the parser
    "log": math.log,
}


@dataclass(frozen=True)
class Func(Node):
    name: str
    arg: Node

    def eval(self, x):
        v = self.arg.eval(x)
        try:
            return _FUNCS[self.name](v)
        except (ValueError, OverflowError):
            return math.nan

    def diff(self, var):
        da = self.arg.diff(var)
        if _const(da, 0.0):
            return ZERO
        if self.name == "exp":
            outer = self
        elif self.name == "sin":
            outer = Func("cos", self.arg)
        elif self.name == "cos":
            outer = neg(Func("sin", self.arg))
        elif self.name == "sqrt":
            outer = div(Const(0.5), self)
        else:
            outer = div(ONE, self.arg)
        return mul(outer, da)

    def __str__(self):
        return f"{self.name}({self.arg})"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    pos = 0
    tokens = []
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExpressionError("unexpected character", source, bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            raise ExpressionError(f"expected {value!r}", self.source, pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {text!r}", self.source, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1:]
            rhs = self.unary()
            if op == "/" and _const(rhs, 0.0):
                raise ExpressionError("division by zero", self.source, pos)
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text in ("-", "+"):
            self.take()
            arg = self.unary()
            return neg(arg) if text == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return power(base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if re.fullmatch(r"x[0-3]", text):
                return Var(int(text[1]))
            if text in ("exp", "sin", "cos", "sqrt"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                if arg.is_const():
                    value = Func(text, arg).eval(None)
                    if not math.isfinite(value):
                        raise ExpressionError(f"{text} of {arg.value} is undefined", self.source, pos)
                    return Const(value)
                return Func(text, arg)
            raise ExpressionError(f"unknown name {text!r}", self.source, pos)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExpressionError("unexpected end of expression", self.source, pos)
        raise ExpressionError(f"unexpected {text!r}", self.source, pos)


def parse(source) -> Node:
    """Parse an expression string.  Plain numbers are accepted as constants."""
    if isinstance(source, (int, float)) and not isinstance(source, bool):
        return Const(float(source))
    if not isinstance(source, str):
        raise ExpressionError(f"expression must be a string or number, got {type(source).__name__}")
    return _Parser(source).parse()


def parse_matrix(rows, shape=(4, 4)) -> np.ndarray:
    """Parse a nested list of expressions into an object array of nodes."""
    arr = np.empty(shape, dtype=object)
    try:
        flat = np.array(rows, dtype=object)
    except ValueError as exc:
        raise ExpressionError(f"ragged expression table: {exc}") from exc
    if flat.shape != tuple(shape):
        raise ExpressionError(f"expected an expression table of shape {shape}, got {flat.shape}")
    for idx in np.ndindex(*shape):
        arr[idx] = parse(flat[idx])
    return arr
