"""
Recursive-descent parser for coefficient expressions.

Grammar (EBNF)::

    expression := term { ("+" | "-") term }
    term       := unary { ("*" | "/") unary }
    unary      := "-" unary | power
    power      := atom [ "^" unary ]              (right associative)
    atom       := NUMBER
                | "x" | "pi" | "e"
                | FUNCTION "(" expression ")"
                | ("sgnpow" | "abspow") "(" expression "," ["-"] NUMBER ")"
                | "(" expression ")"
    FUNCTION   := sin | cos | tan | exp | log | sqrt | abs | sgn | sinh | cosh | tanh

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.
Offsets in error messages are byte offsets into the (ASCII) source text.
Trees deeper than ``MAX_DEPTH`` are rejected with a syntax error at the
token that crosses the limit.
"""

import math
import re
from dataclasses import dataclass
from typing import Dict, List

from hlpicone.coeffexpr.nodes import (
    FUNCTIONS,
    POWER_FUNCTIONS,
    AbsPow,
    BinOp,
    Call,
    CoeffExpr,
    Const,
    Neg,
    Node,
    SgnPow,
    Var,
)
from hlpicone.errors import ExprSyntaxError, UnknownIdentifierError

NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

# evaluation and differentiation recurse once per tree level
MAX_DEPTH = 64


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, IDENT, OP, END
    text: str
    offset: int


class Scanner:
    token_regex = re.compile(
        r"\s*(?:"
        r"(?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
        r"|(?P<IDENT>[A-Za-z_][A-Za-z_0-9]*)"
        r"|(?P<OP>[-+*/^(),])"
        r")"
    )

    def __init__(self, text: str):
        self.text = text

    def lex(self) -> List[Token]:
        tokens = []
        pos = 0
        n = len(self.text)
        while True:
            while pos < n and self.text[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = self.token_regex.match(self.text, pos)
            if m is None or m.lastgroup is None:
                raise ExprSyntaxError(
                    f"unexpected character {self.text[pos]!r}", pos, "a number, name or operator"
                )
            kind = m.lastgroup
            tokens.append(Token(kind, m.group(kind), m.start(kind)))
            pos = m.end()
        tokens.append(Token("END", "", n))
        return tokens


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = Scanner(text).lex()
        self.pos = 0
        self.nesting = 0
        self.depths: Dict[int, int] = {}

    def parse(self) -> CoeffExpr:
        node = self._expression()
        self._expect("END", "end of input")
        return CoeffExpr(node)

    # token helpers

    def _peek(self) -> Token:
        return self.tokens[self.pos]

    def _next(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _at_op(self, *ops: str) -> bool:
        token = self._peek()
        return token.kind == "OP" and token.text in ops

    def _expect(self, kind: str, expected: str, text: str = None) -> Token:
        token = self._peek()
        if token.kind != kind or (text is not None and token.text != text):
            found = token.text if token.kind != "END" else "end of input"
            raise ExprSyntaxError(f"unexpected {found!r}", token.offset, expected)
        return self._next()

    # depth bookkeeping

    def _too_deep(self, token: Token) -> ExprSyntaxError:
        return ExprSyntaxError("expression nested too deeply", token.offset, f"at most {MAX_DEPTH} levels")

    def _enter(self, token: Token) -> None:
        self.nesting += 1
        if self.nesting > MAX_DEPTH:
            raise self._too_deep(token)

    def _leave(self) -> None:
        self.nesting -= 1

    def _node(self, node: Node, token: Token) -> Node:
        if isinstance(node, BinOp):
            children = (node.left, node.right)
        else:
            children = (node.arg,)
        depth = 1 + max(self.depths.get(id(child), 1) for child in children)
        if depth > MAX_DEPTH:
            raise self._too_deep(token)
        self.depths[id(node)] = depth
        return node

    # grammar rules

    def _expression(self) -> Node:
        node = self._term()
        while self._at_op("+", "-"):
            token = self._next()
            node = self._node(BinOp(token.text, node, self._term()), token)
        return node

    def _term(self) -> Node:
        node = self._unary()
        while self._at_op("*", "/"):
            token = self._next()
            node = self._node(BinOp(token.text, node, self._unary()), token)
        return node

    def _unary(self) -> Node:
        signs = []
        while self._at_op("-"):
            signs.append(self._next())
        node = self._power()
        for token in reversed(signs):
            node = self._node(Neg(node), token)
        return node

    def _power(self) -> Node:
        base = self._atom()
        if self._at_op("^"):
            token = self._next()
            self._enter(token)
            exponent = self._unary()
            self._leave()
            return self._node(BinOp("^", base, exponent), token)
        return base

    def _atom(self) -> Node:
        token = self._peek()
        if token.kind == "NUMBER":
            self._next()
            return Const(float(token.text))
        if token.kind == "IDENT":
            return self._identifier()
        if self._at_op("("):
            self._enter(self._next())
            node = self._expression()
            self._expect("OP", "')'", ")")
            self._leave()
            return node
        found = token.text if token.kind != "END" else "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", token.offset, "an operand")

    def _identifier(self) -> Node:
        token = self._next()
        name = token.text
        if name == "x":
            return Var()
        if name in NAMED_CONSTANTS:
            return Const(NAMED_CONSTANTS[name], name)
        if name in FUNCTIONS:
            self._expect("OP", f"'(' after {name}", "(")
            self._enter(token)
            arg = self._expression()
            self._expect("OP", "')'", ")")
            self._leave()
            return self._node(Call(name, arg), token)
        if name in POWER_FUNCTIONS:
            self._expect("OP", f"'(' after {name}", "(")
            self._enter(token)
            arg = self._expression()
            self._expect("OP", "','", ",")
            exponent = self._literal()
            self._expect("OP", "')'", ")")
            self._leave()
            if name == "sgnpow":
                return self._node(SgnPow(arg, exponent), token)
            return self._node(AbsPow(arg, exponent), token)
        raise UnknownIdentifierError(name, token.offset)

    def _literal(self) -> float:
        sign = 1.0
        if self._at_op("-"):
            self._next()
            sign = -1.0
        token = self._expect("NUMBER", "a numeric exponent literal")
        return sign * float(token.text)


def parse(text: str) -> CoeffExpr:
    """Parse ``text`` into a :class:`CoeffExpr`.

    Raises:
      ExprSyntaxError: with the offset of the offending token.
      UnknownIdentifierError: for names outside the grammar.
    """
    return Parser(text).parse()
