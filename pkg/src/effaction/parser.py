"""Recursive-descent parser for model expressions.

Grammar (lowest to highest precedence)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

The exponent of ``^`` must be a constant integer expression; it is folded
at parse time. Columns in error messages are 1-based.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ArityError, ExprSyntaxError, UnknownIdentifierError
from .expr import FUNCTIONS, Add, Call, Div, Expr, Mul, Neg, Num, Pow, Sub, Var, depends_on_x

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(source) + 1))
    return tokens


class _Parser:
    def __init__(self, source: str, variable: str):
        self.tokens = tokenize(source)
        self.i = 0
        self.variable = variable

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind != "op":
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.column)
        return self.advance()

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", self.tok.column)
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.column)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            column = self.advance().column
            exponent = self.unary()
            return Pow(base, self._integer_exponent(exponent, column))
        return base

    def _integer_exponent(self, node: Expr, column: int) -> int:
        if depends_on_x(node):
            raise ExprSyntaxError("exponent of '^' must not depend on the variable", column)
        try:
            value = node.evaluate(0.0)
        except ArithmeticError:
            raise ExprSyntaxError("exponent of '^' is not a finite number", column) from None
        if value != round(value):
            raise ExprSyntaxError(
                f"exponent of '^' must be an integer, got {value!r}; "
                "write general powers as exp(p*log(u))",
                column,
            )
        return int(round(value))

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {tok.text!r} is out of range", tok.column)
            return Num(value)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if tok.text == self.variable:
                if is_call:
                    raise ArityError(f"{tok.text!r} is a variable, not a function", tok.column)
                return Var()
            if tok.text in FUNCTIONS:
                if not is_call:
                    raise ArityError(f"function {tok.text!r} needs one argument in parentheses", tok.column)
                return self.call(tok)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.column)
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.column)

    def call(self, name: Token) -> Expr:
        self.expect("(")
        if self.tok.kind == "op" and self.tok.text == ")":
            raise ArityError(f"{name.text}() takes exactly one argument, got 0", name.column)
        arg = self.expr()
        if self.tok.kind == "op" and self.tok.text == ",":
            count = 1
            while self.tok.kind == "op" and self.tok.text == ",":
                self.advance()
                self.expr()
                count += 1
            raise ArityError(f"{name.text}() takes exactly one argument, got {count}", name.column)
        self.expect(")")
        return Call(name.text, arg)


def parse_expression(source: str, variable: str = "x") -> Expr:
    """Parse ``source`` into an expression tree over the single ``variable``."""
    return _Parser(source, variable).parse()
