"""Expression DSL: tokenizer, recursive-descent parser and jet evaluator.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" unary)?
    unary  := "-"? atom
    atom   := number | coord | func "(" expr ")" | "(" expr ")"
    coord  := ("x"|"y") digits
    func   := sin|cos|tan|atan|exp|log|sqrt|sinh|cosh

Note that negation binds tighter than ``^``: ``-x1^2`` is ``(-x1)^2``.
Coordinates ``x1..xn`` map to slots ``0..n-1`` and ``y1..ym`` to
``n..n+m-1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets
from .jets import Jet

__all__ = [
    "Dims",
    "Expression",
    "Num",
    "Coord",
    "BinOp",
    "Neg",
    "Call",
    "ExprError",
    "ParseError",
    "UnknownIdentifierError",
    "IndexOutOfRangeError",
    "DomainError",
    "parse",
    "to_source",
    "evaluate_jet",
    "evaluate_many",
    "FUNCTIONS",
]


@dataclass(frozen=True)
class Dims:
    n: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)) or self.n < 1 or self.m < 1:
            raise ValueError(f"dimensions must be positive integers, got n={self.n} m={self.m}")

    @property
    def total(self) -> int:
        return self.n + self.m


# -- tree ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    kind: str  # "x" or "y"
    index: int  # 1-based, as written
    slot: int  # 0-based position in u = (x, y)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Num, Coord, BinOp, Neg, Call]

FUNCTIONS = {
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
    "atan": jets.atan,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "sinh": jets.sinh,
    "cosh": jets.cosh,
}


# -- errors -------------------------------------------------------------------


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, source: str = ""):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset
        self.source = source


class UnknownIdentifierError(ParseError):
    pass


class IndexOutOfRangeError(ParseError):
    pass


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of an elementary function."""

    def __init__(self, message: str, subtree: Expression):
        super().__init__(f"{message}: {to_source(subtree)}")
        self.subtree = subtree


# -- tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # UTF-8 byte offset


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        offset = len(source[:pos].encode("utf-8"))
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}", offset, source)
        if match.lastgroup != "ws":
            tokens.append(_Token(match.lastgroup, match.group(), offset))
        pos = match.end()
    tokens.append(_Token("end", "", len(source.encode("utf-8"))))
    return tokens


# -- parser -------------------------------------------------------------------

_COORD = re.compile(r"([xy])(\d+)$")


class _Parser:
    def __init__(self, source: str, dims: Dims):
        self.source = source
        self.dims = dims
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None, cls=ParseError):
        tok = tok or self.tok
        shown = tok.text or "end of input"
        return cls(f"{message} (found {shown!r})", tok.offset, self.source)

    def expect(self, text: str):
        if self.tok.text != text:
            raise self.error(f"expected {text!r}")
        return self.advance()

    def parse(self) -> Expression:
        tree = self.expr()
        if self.tok.kind != "end":
            raise self.error("unexpected token")
        return tree

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.unary()
        if self.tok.text == "^":
            self.advance()
            node = BinOp("^", node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            match = _COORD.match(tok.text)
            if match:
                return self.coord(tok, match.group(1), int(match.group(2)))
            raise self.error("unknown identifier", tok, UnknownIdentifierError)
        raise self.error("syntax error", tok)

    def coord(self, tok, kind, index):
        limit = self.dims.n if kind == "x" else self.dims.m
        if not 1 <= index <= limit:
            raise self.error(
                f"coordinate index out of range 1..{limit}", tok, IndexOutOfRangeError
            )
        slot = index - 1 if kind == "x" else self.dims.n + index - 1
        return Coord(kind, index, slot)


def parse(source: str, dims: Dims) -> Expression:
    """Parse DSL text into an immutable expression tree."""
    if not isinstance(source, str):
        raise TypeError(f"expression source must be text, got {type(source).__name__}")
    return _Parser(source, dims).parse()


def to_source(node: Expression) -> str:
    """Fully parenthesized DSL text that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Coord):
        return f"{node.kind}{node.index}"
    if isinstance(node, Neg):
        return f"-({to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation ---------------------------------------------------------------


def _literal_int(node: Expression) -> int | None:
    sign = 1
    if isinstance(node, Neg):
        sign, node = -1, node.operand
    if isinstance(node, Num) and float(node.value).is_integer():
        return sign * int(node.value)
    return None


class _Evaluator:
    def __init__(self, point, order: int):
        self.order = order
        self.coords = Jet.coordinates(point, order)
        self.dim = self.coords.dim
        self.memo: dict[int, Jet] = {}

    def __call__(self, node: Expression) -> Jet:
        key = id(node)
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = self.eval(node)
        return hit

    def eval(self, node):
        if isinstance(node, Num):
            return Jet.constant(node.value, self.dim, self.order)
        if isinstance(node, Coord):
            if node.slot >= self.dim:
                raise DomainError("coordinate outside the evaluation point", node)
            return self.coords[node.slot]
        if isinstance(node, Neg):
            return -self(node.operand)
        if isinstance(node, Call):
            return self.call(node)
        if isinstance(node, BinOp):
            return self.binop(node)
        raise TypeError(f"not an expression node: {node!r}")

    def call(self, node: Call) -> Jet:
        arg = self(node.arg)
        v = float(arg.value)
        if node.func == "log" and v <= 0.0:
            raise DomainError("log of nonpositive value", node)
        if node.func == "sqrt" and (v < 0.0 or (v == 0.0 and self.order > 0)):
            raise DomainError("sqrt outside its smooth domain", node)
        if node.func == "tan" and math.cos(v) == 0.0:
            raise DomainError("tan at a pole", node)
        with np.errstate(over="raise", invalid="raise"):
            try:
                out = FUNCTIONS[node.func](arg)
            except FloatingPointError as exc:
                raise DomainError(f"{node.func} overflow", node) from exc
        if not np.all(np.isfinite(out.coef)):
            raise DomainError(f"{node.func} produced a non-finite value", node)
        return out

    def binop(self, node: BinOp) -> Jet:
        left = self(node.left)
        if node.op == "^":
            p = _literal_int(node.right)
            if p is not None:
                if p < 0 and float(left.value) == 0.0:
                    raise DomainError("negative power of zero", node)
                return left.ipow(p)
            if float(left.value) <= 0.0:
                raise DomainError("non-integer power needs a positive base", node)
            if isinstance(node.right, (Num, Neg)) and _is_number(node.right):
                return jets.power(left, _number(node.right))
            return jets.exp(self(node.right) * jets.log(left))
        right = self(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if float(right.value) == 0.0:
                raise DomainError("division by zero", node)
            return left / right
        raise TypeError(f"unknown operator {node.op!r}")


def _is_number(node) -> bool:
    return isinstance(node, Num) or (isinstance(node, Neg) and isinstance(node.operand, Num))


def _number(node) -> float:
    return -node.operand.value if isinstance(node, Neg) else node.value


def evaluate_jet(f: Expression, point, order: int = 4) -> Jet:
    """Value and all partials of ``f`` at ``point`` up to total ``order``."""
    if order < 0:
        raise ValueError(f"jet order must be nonnegative, got {order}")
    return _Evaluator(point, order)(f)


def evaluate_many(nodes, point, order: int) -> Jet:
    """Evaluate a nested list of expressions into one jet array.

    Plain numbers are accepted in place of expressions. Shared subtrees are
    evaluated once.
    """
    ev = _Evaluator(point, order)
    arr = np.array(nodes, dtype=object)
    flat = [
        ev(item) if not isinstance(item, (int, float)) else Jet.constant(item, ev.dim, order)
        for item in arr.ravel()
    ]
    coef = np.stack([j.coef for j in flat]) if flat else np.zeros((0, ev.coords.coef.shape[-1]))
    return Jet(coef.reshape(arr.shape + coef.shape[-1:]), ev.dim, order)
