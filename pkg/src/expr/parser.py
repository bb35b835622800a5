"""Precedence-climbing parser for entire-map expressions.

Grammar (see docs/GRAMMAR.md): ``+ -`` bind loosest, then ``*``, then unary
minus, then ``^``, which is right-associative. Exponents are non-negative
integer literals or the index of an enclosing ``sum``/``prod``. Anything that
is not entire (division, logarithms, roots, negative or fractional powers) is
rejected.
"""

import math
import re
from dataclasses import dataclass
from typing import Dict, List, Tuple

from ..utils.errors import (
    ExpressionSyntaxError,
    NonEntireOperationError,
    UnknownIdentifierError,
)
from .nodes import FUNCTIONS, REDUCTIONS, BinOp, Call, ExprAst, IndexRef, Lit, Neg, Pow, Reduce, Var

BINDING_POWER = {"+": 10, "-": 10, "*": 20}
UNARY_MINUS_POWER = 30
MAX_FOLDED_EXPONENT_BITS = 62

NON_ENTIRE_NAMES = {"log", "ln", "sqrt", "tan", "cot", "sec", "csc", "tanh", "abs", "conj", "re", "im", "arg"}
RESERVED = {"i", "pi", "z"} | set(FUNCTIONS) | set(REDUCTIONS)

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_VARIABLE = re.compile(r"z(\d+)$")
_SYMBOLS = "+-*^/(),"


@dataclass(frozen=True)
class Token:
    kind: str  # num | imag | ident | op | end
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    """Split an expression into tokens, recording byte offsets."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if not ch.isascii():
            raise ExpressionSyntaxError(f"unexpected character {ch!r} at offset {pos}", offset=pos)
        number = _NUMBER.match(text, pos)
        if number:
            end = number.end()
            if end < len(text) and text[end] == "i" and not (end + 1 < len(text) and (text[end + 1].isalnum() or text[end + 1] == "_")):
                tokens.append(Token("imag", number.group(0), pos))
                pos = end + 1
            else:
                tokens.append(Token("num", number.group(0), pos))
                pos = end
            continue
        ident = _IDENT.match(text, pos)
        if ident:
            tokens.append(Token("ident", ident.group(0), pos))
            pos = ident.end()
            continue
        if ch in _SYMBOLS:
            tokens.append(Token("op", ch, pos))
            pos += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r} at offset {pos}", offset=pos)
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n_vars: int):
        self.tokens = tokenize(text)
        self.pos = 0
        self.n_vars = n_vars
        self.scope: Dict[str, Tuple[int, int]] = {}

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.advance()
        if token.text != text or token.kind not in ("op",):
            raise ExpressionSyntaxError(
                f"expected {text!r} at offset {token.offset}, found {token.text or 'end of input'!r}",
                offset=token.offset,
            )
        return token

    def parse(self) -> ExprAst:
        node = self.expression(0)
        token = self.peek()
        if token.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {token.text!r} at offset {token.offset}", offset=token.offset)
        return node

    def expression(self, min_power: int) -> ExprAst:
        left = self.prefix()
        while True:
            token = self.peek()
            if token.kind == "op" and token.text == "/":
                raise NonEntireOperationError(f"non-entire operation '/' at offset {token.offset}", offset=token.offset)
            power = BINDING_POWER.get(token.text) if token.kind == "op" else None
            if power is None or power <= min_power:
                return left
            self.advance()
            left = BinOp(token.text, left, self.expression(power))

    def prefix(self) -> ExprAst:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Neg(self.expression(UNARY_MINUS_POWER))
        return self.power()

    def power(self) -> ExprAst:
        base = self.primary()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return Pow(base, self.exponent_chain())
        return base

    def exponent_chain(self):
        """Right-associative: 2^3^2 is 2^(3^2). Literal towers fold to one integer."""
        start = self.peek()
        value = self.exponent()
        if not (self.peek().kind == "op" and self.peek().text == "^"):
            return value
        self.advance()
        rest = self.exponent_chain()
        if isinstance(value, str) or isinstance(rest, str):
            raise ExpressionSyntaxError(
                f"a bound index cannot appear in a power tower at offset {start.offset}",
                offset=start.offset,
            )
        if value > 1 and rest * math.log2(value) > MAX_FOLDED_EXPONENT_BITS:
            raise ExpressionSyntaxError(
                f"exponent {value}^{rest} is too large at offset {start.offset}", offset=start.offset
            )
        return value ** rest

    def exponent(self):
        token = self.advance()
        if token.kind == "num" and token.text.isdigit():
            return int(token.text)
        if token.kind == "ident" and token.text in self.scope:
            lo, _ = self.scope[token.text]
            if lo < 0:
                raise NonEntireOperationError(
                    f"non-entire operation: index {token.text} may be negative at offset {token.offset}",
                    offset=token.offset,
                )
            return token.text
        if (token.kind == "op" and token.text == "-") or token.kind == "num":
            raise NonEntireOperationError(
                f"non-entire operation: exponent must be a non-negative integer at offset {token.offset}",
                offset=token.offset,
            )
        raise ExpressionSyntaxError(
            f"exponent must be an integer literal or a bound index at offset {token.offset}",
            offset=token.offset,
        )

    def integer(self) -> int:
        token = self.advance()
        sign = 1
        if token.kind == "op" and token.text == "-":
            sign = -1
            token = self.advance()
        if token.kind != "num" or not token.text.isdigit():
            raise ExpressionSyntaxError(f"expected an integer bound at offset {token.offset}", offset=token.offset)
        return sign * int(token.text)

    def primary(self) -> ExprAst:
        token = self.advance()
        if token.kind == "num":
            return Lit(complex(float(token.text), 0.0))
        if token.kind == "imag":
            return Lit(complex(0.0, float(token.text)))
        if token.kind == "op" and token.text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if token.kind == "ident":
            return self.identifier(token)
        raise ExpressionSyntaxError(
            f"unexpected {token.text or 'end of input'!r} at offset {token.offset}", offset=token.offset
        )

    def identifier(self, token: Token) -> ExprAst:
        name = token.text
        if name in self.scope:
            return IndexRef(name)
        if name == "i":
            return Lit(1j)
        if name == "pi":
            return Lit(complex(math.pi, 0.0))
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expression(0)
            self.expect(")")
            return Call(name, arg)
        if name in REDUCTIONS:
            return self.reduction(name)
        if name in NON_ENTIRE_NAMES:
            raise NonEntireOperationError(f"non-entire operation '{name}' at offset {token.offset}", offset=token.offset)
        if name == "z" and self.n_vars == 1:
            return Var(1)
        match = _VARIABLE.match(name)
        if match:
            index = int(match.group(1))
            if 1 <= index <= self.n_vars:
                return Var(index)
            raise UnknownIdentifierError(
                f"variable {name} out of range for n={self.n_vars} at offset {token.offset}", offset=token.offset
            )
        raise UnknownIdentifierError(f"unknown identifier {name!r} at offset {token.offset}", offset=token.offset)

    def reduction(self, op: str) -> ExprAst:
        self.expect("(")
        token = self.advance()
        if token.kind != "ident" or token.text in RESERVED or _VARIABLE.match(token.text) or token.text in self.scope:
            raise ExpressionSyntaxError(f"invalid index name {token.text!r} at offset {token.offset}", offset=token.offset)
        self.expect(",")
        lo = self.integer()
        self.expect(",")
        hi = self.integer()
        self.expect(",")
        self.scope[token.text] = (lo, hi)
        try:
            body = self.expression(0)
        finally:
            del self.scope[token.text]
        self.expect(")")
        return Reduce(op, token.text, lo, hi, body)


def parse(text: str, n_vars: int) -> ExprAst:
    """Parse one scalar component of a map C^n_vars -> C."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", offset=0)
    if n_vars < 1:
        raise ExpressionSyntaxError(f"dimension must be at least 1, got {n_vars}", offset=0)
    return _Parser(text, n_vars).parse()
