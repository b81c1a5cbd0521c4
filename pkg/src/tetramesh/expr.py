"""A small arithmetic language over x, y, z.

Grammar (lowest precedence first)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INTEGER)?
    atom   := NUMBER | 'x' | 'y' | 'z' | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of ``sqrt``, ``sin``, ``cos``.  ``×`` and ``÷`` are accepted
as spellings of ``*`` and ``/``.  Exponents are integer literals, so
``x^2^3`` is rejected rather than silently associated.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownIdentifierError

VARIABLES = ("x", "y", "z")
FUNCTIONS = ("sqrt", "sin", "cos")


@dataclass(frozen=True)
class Num:
    value: float
    text: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Num | Var | Neg | BinOp | Pow | Call

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()×÷])
""", re.VERBOSE)

_CANON = {"×": "*", "÷": "/"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            toks.append(_Tok(kind, _CANON.get(tok, tok), _byte(text, pos)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte(text, len(text))))
    return toks


def _byte(text, pos):
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text or t.kind == "end":
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", t.offset)
        return self.take()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.take()
                sign = -1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ExprSyntaxError("exponent must be an integer literal", t.offset)
            self.take()
            if self.tok.kind == "op" and self.tok.text == "^":
                raise ExprSyntaxError("chained '^' needs parentheses", self.tok.offset)
            return Pow(base, sign * int(t.text))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(float(t.text), t.text)
        if t.kind == "name":
            self.take()
            if t.text in VARIABLES:
                return Var(t.text)
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            raise UnknownIdentifierError(f"unknown identifier {t.text!r}", t.offset)
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"expected a value, found {found}", t.offset)


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# precedence levels used by the printer
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _ADD if node.op in "+-" else _MUL
    if isinstance(node, Neg):
        return _NEG
    if isinstance(node, Pow):
        return _POW
    return _ATOM


def _wrap(node, need):
    s = to_text(node)
    return f"({s})" if _prec(node) < need else s


def to_text(node: Expr) -> str:
    """Render with the fewest parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _NEG)
    if isinstance(node, Pow):
        return f"{_wrap(node.base, _ATOM)}^{node.exponent}"
    p = _prec(node)
    left = _wrap(node.left, p)
    right = _wrap(node.right, p + 1)
    if node.op in "+-":
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"


def evaluate(node: Expr, x, y, z):
    """Evaluate elementwise on broadcastable arrays.

    Raises :class:`DomainError` on division by zero or the square root of a
    negative number anywhere in the input.
    """
    env = {"x": np.asarray(x, dtype=np.float64),
           "y": np.asarray(y, dtype=np.float64),
           "z": np.asarray(z, dtype=np.float64)}
    return _eval(node, env)


def _eval(node, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Pow):
        base = _eval(node.base, env)
        if node.exponent < 0 and np.any(base == 0):
            raise DomainError("division by zero in negative power")
        return base ** node.exponent
    if isinstance(node, Call):
        arg = _eval(node.arg, env)
        if node.func == "sqrt":
            if np.any(arg < 0):
                raise DomainError("square root of a negative number")
            return np.sqrt(arg)
        return np.sin(arg) if node.func == "sin" else np.cos(arg)
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if np.any(right == 0):
        raise DomainError("division by zero")
    return left / right
