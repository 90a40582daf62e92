"""Minimal arithmetic grammar for time-dependent coefficients.

Grammar (one variable ``s``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := number | 's' | '(' expr ')' | func '(' expr ')'
    func   := exp | sin | cos | sqrt

Expressions compile to numpy-vectorized callables. ``render`` produces a fully
parenthesized canonical form that parses back to an identical tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ExpressionError

FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    raw = text.encode("utf-8")
    if len(raw) != len(text):
        # offsets are byte offsets; a non-ASCII char can never be valid anyway
        for i, ch in enumerate(text):
            if ord(ch) > 127:
                raise ExpressionError(f"unexpected character {ch!r}", len(text[:i].encode("utf-8")), text)
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(Token("num", m.group(), pos))
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(Token("ident", m.group(), pos))
            pos = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append(Token("op", ch, pos))
            pos += 1
            continue
        raise ExpressionError(f"unexpected character {ch!r}", pos, text)
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, what: str):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionError(f"expected {what}, found {found}", tok.offset, self.text)

    def accept(self, *ops: str) -> str | None:
        if self.tok.kind == "op" and self.tok.text in ops:
            self.i += 1
            return self.tokens[self.i - 1].text
        return None

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while (op := self.accept("+", "-")) is not None:
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while (op := self.accept("*", "/")) is not None:
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "s":
                return Var()
            if tok.text not in FUNCTIONS:
                raise ExpressionError(f"unknown identifier {tok.text!r}", tok.offset, self.text)
            if not self.accept("("):
                self.fail("'(' after function name")
            arg = self.expr()
            if not self.accept(")"):
                self.fail("')'")
            return Call(tok.text, arg)
        if self.accept("("):
            node = self.expr()
            if not self.accept(")"):
                self.fail("')'")
            return node
        self.fail("number, 's', function or '('")


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree, raising ExpressionError on failure."""
    return _Parser(text).parse()


def render(node: Node) -> str:
    """Canonical text for ``node``; ``parse(render(n)) == n``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "s"
    if isinstance(node, Neg):
        return f"(-{render(node.operand)})"
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({render(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def depends_on_s(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, Neg):
        return depends_on_s(node.operand)
    if isinstance(node, BinOp):
        return depends_on_s(node.left) or depends_on_s(node.right)
    return depends_on_s(node.arg)


def evaluate(node: Node, s):
    """Evaluate ``node`` at ``s`` (scalar or array) with numpy semantics."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return s
    if isinstance(node, Neg):
        return -evaluate(node.operand, s)
    if isinstance(node, Call):
        return FUNCTIONS[node.name](evaluate(node.arg, s))
    a = evaluate(node.left, s)
    b = evaluate(node.right, s)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return np.divide(a, b)
    return np.power(a, b)


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Parse ``text`` and return a vectorized function of ``s``."""
    tree = parse(text)

    def f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            out = evaluate(tree, s)
        return np.broadcast_to(np.asarray(out, dtype=float), s.shape).copy()

    f.tree = tree
    return f
