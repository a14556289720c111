"""Boolean expressions over Symbol_0..Symbol_8.

Grammar (precedence low to high, binary ops left-associative):

    or_expr   := and_expr ('|' and_expr)*
    and_expr  := not_expr ('&' not_expr)*
    not_expr  := '~' not_expr | atom
    atom      := SYMBOL | '(' or_expr ')'

Rendering emits minimal parentheses and round-trips structurally.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .objects import ALL_OBJECTS, Attribute, ObjectSpec

N_SYMBOLS = 9


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    child: "BoolExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[Var, Not, And, Or]


class ExprSyntaxError(ValueError):
    """Parse failure; `position` is the character offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(r"\s*(Symbol_(\d+)|[&|~()])")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unknown token {text[bad:bad+10]!r}", bad)
        tok = m.group(1)
        if m.group(2) is not None:
            index = int(m.group(2))
            if index >= N_SYMBOLS:
                raise ExprSyntaxError(f"symbol index out of range: {index}", m.start(1))
        tokens.append((tok, m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return len(self.text)

    def advance(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> BoolExpr:
        expr = self.or_expr()
        if self.peek() is not None:
            raise ExprSyntaxError(f"unexpected token {self.peek()!r}", self.pos())
        return expr

    def or_expr(self) -> BoolExpr:
        expr = self.and_expr()
        while self.peek() == "|":
            self.advance()
            expr = Or(expr, self.and_expr())
        return expr

    def and_expr(self) -> BoolExpr:
        expr = self.not_expr()
        while self.peek() == "&":
            self.advance()
            expr = And(expr, self.not_expr())
        return expr

    def not_expr(self) -> BoolExpr:
        if self.peek() == "~":
            self.advance()
            return Not(self.not_expr())
        return self.atom()

    def atom(self) -> BoolExpr:
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of expression", self.pos())
        if tok.startswith("Symbol_"):
            self.advance()
            return Var(int(tok.split("_")[1]))
        if tok == "(":
            self.advance()
            expr = self.or_expr()
            if self.peek() != ")":
                raise ExprSyntaxError("expected ')'", self.pos())
            self.advance()
            return expr
        raise ExprSyntaxError(f"unexpected token {tok!r}", self.pos())


def parse(text: str) -> BoolExpr:
    return _Parser(text).parse()


_PREC = {Or: 1, And: 2, Not: 3, Var: 4}


def to_text(expr: BoolExpr) -> str:
    """Canonical rendering with minimal parentheses; parse(to_text(e)) == e."""

    def render(node: BoolExpr, parent_prec: int, is_right: bool) -> str:
        prec = _PREC[type(node)]
        if isinstance(node, Var):
            s = f"Symbol_{node.index}"
        elif isinstance(node, Not):
            s = "~" + render(node.child, prec, False)
        else:
            op = " & " if isinstance(node, And) else " | "
            s = render(node.left, prec, False) + op + render(node.right, prec, True)
        # left-associative grammar: a right child at equal precedence needs parens
        if prec < parent_prec or (prec == parent_prec and is_right):
            return f"({s})"
        return s

    return render(expr, 0, False)


def expr_length(expr: BoolExpr) -> int:
    """Token count of the canonical rendering (symbols, operators, parens)."""
    return len(_tokenize(to_text(expr)))


def symbols_in(expr: BoolExpr) -> set[int]:
    if isinstance(expr, Var):
        return {expr.index}
    if isinstance(expr, Not):
        return symbols_in(expr.child)
    return symbols_in(expr.left) | symbols_in(expr.right)


class SymbolMap:
    """Bijection between symbol indices 0..8 and the 9 basis attributes."""

    def __init__(self, attributes: list[Attribute]):
        if len(attributes) != N_SYMBOLS or len(set(attributes)) != N_SYMBOLS:
            raise ValueError("symbol map must cover all 9 attributes exactly once")
        self._by_index = tuple(attributes)
        self._by_attr = {a: i for i, a in enumerate(attributes)}

    def attribute(self, index: int) -> Attribute:
        return self._by_index[index]

    def symbol(self, attribute: Attribute) -> int:
        return self._by_attr[attribute]

    @classmethod
    def random(cls, rng) -> "SymbolMap":
        from .objects import ALL_ATTRIBUTES

        order = list(ALL_ATTRIBUTES)
        perm = rng.permutation(len(order))
        return cls([order[i] for i in perm])

    @classmethod
    def identity(cls) -> "SymbolMap":
        from .objects import ALL_ATTRIBUTES

        return cls(list(ALL_ATTRIBUTES))


def satisfies(expr: BoolExpr, obj: ObjectSpec, symbol_map: SymbolMap) -> bool:
    if isinstance(expr, Var):
        return symbol_map.attribute(expr.index).satisfied_by(obj)
    if isinstance(expr, Not):
        return not satisfies(expr.child, obj, symbol_map)
    if isinstance(expr, And):
        return satisfies(expr.left, obj, symbol_map) and satisfies(
            expr.right, obj, symbol_map
        )
    return satisfies(expr.left, obj, symbol_map) or satisfies(
        expr.right, obj, symbol_map
    )


def denotation(expr: BoolExpr, symbol_map: SymbolMap) -> frozenset[ObjectSpec]:
    """The subset of the 18 identities the expression picks out."""
    return frozenset(o for o in ALL_OBJECTS if satisfies(expr, o, symbol_map))


def equivalent(a: BoolExpr, b: BoolExpr, symbol_map: SymbolMap) -> bool:
    return denotation(a, symbol_map) == denotation(b, symbol_map)
