"""Lexer and recursive-descent parser for heuristic programs.

Source form:  score: <numeric expr>  roundup: <boolean expr>

The grammar is parsed kind-agnostically (parentheses may wrap either kind)
and Program.create performs the kind check afterwards, reporting mixed
boolean/numeric usage as a type error rather than a parse error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .nodes import (
    BinOp, BoolLit, BoolOp, Call, Cmp, Feature, If, Neg, Node, Not, Num,
    Program,
)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|[+\-*/(),:<>])
""", re.VERBOSE)

_KEYWORDS = {"score", "roundup", "true", "false", "and", "or", "not",
             "min", "max", "abs", "if"}


@dataclass
class _Token:
    kind: str        # number | name | op | keyword | eof
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        group = m.lastgroup
        chunk = m.group()
        if group == "ws":
            pass
        elif group == "number":
            tokens.append(_Token("number", chunk, line, col))
        elif group == "name":
            kind = "keyword" if chunk in _KEYWORDS else "name"
            tokens.append(_Token(kind, chunk, line, col))
        else:
            tokens.append(_Token("op", chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.pos = 0
        self.spans: dict[int, tuple[int, int]] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            found = repr(tok.text) if tok.text else "end of input"
            raise ParseError(f"expected {text!r}, found {found}",
                             tok.line, tok.col)
        return self.advance()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    def span(self, node: Node, tok: _Token) -> Node:
        self.spans[id(node)] = (tok.line, tok.col)
        return node

    # --- grammar, loosest binding first ---

    def parse_program(self) -> Program:
        self.expect("score")
        self.expect(":")
        score = self.parse_expr()
        self.expect("roundup")
        self.expect(":")
        roundup = self.parse_expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}",
                             tok.line, tok.col)
        return Program.create(score, roundup, spans=self.spans)

    def parse_expr(self) -> Node:
        return self.parse_or()

    def parse_or(self) -> Node:
        node = self.parse_and()
        while self.peek().text == "or":
            tok = self.advance()
            node = self.span(BoolOp("or", node, self.parse_and()), tok)
        return node

    def parse_and(self) -> Node:
        node = self.parse_not()
        while self.peek().text == "and":
            tok = self.advance()
            node = self.span(BoolOp("and", node, self.parse_not()), tok)
        return node

    def parse_not(self) -> Node:
        if self.peek().text == "not":
            tok = self.advance()
            return self.span(Not(self.parse_not()), tok)
        return self.parse_cmp()

    def parse_cmp(self) -> Node:
        node = self.parse_add()
        tok = self.peek()
        if tok.text in ("<", "<=", ">", ">=", "=="):
            self.advance()
            node = self.span(Cmp(tok.text, node, self.parse_add()), tok)
        return node

    def parse_add(self) -> Node:
        node = self.parse_mul()
        while self.peek().text in ("+", "-"):
            tok = self.advance()
            node = self.span(BinOp(tok.text, node, self.parse_mul()), tok)
        return node

    def parse_mul(self) -> Node:
        node = self.parse_unary()
        while self.peek().text in ("*", "/"):
            tok = self.advance()
            node = self.span(BinOp(tok.text, node, self.parse_unary()), tok)
        return node

    def parse_unary(self) -> Node:
        if self.peek().text == "-":
            tok = self.advance()
            return self.span(Neg(self.parse_unary()), tok)
        return self.parse_atom()

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return self.span(Num(float(tok.text)), tok)
        if tok.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        if tok.text in ("true", "false"):
            self.advance()
            return self.span(BoolLit(tok.text == "true"), tok)
        if tok.text in ("min", "max"):
            self.advance()
            self.expect("(")
            a = self.parse_expr()
            self.expect(",")
            b = self.parse_expr()
            self.expect(")")
            return self.span(Call(tok.text, (a, b)), tok)
        if tok.text == "abs":
            self.advance()
            self.expect("(")
            a = self.parse_expr()
            self.expect(")")
            return self.span(Call("abs", (a,)), tok)
        if tok.text == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(",")
            then = self.parse_expr()
            self.expect(",")
            other = self.parse_expr()
            self.expect(")")
            return self.span(If(cond, then, other), tok)
        if tok.kind == "name":
            self.advance()
            return self.span(Feature(tok.text), tok)
        found = repr(tok.text) if tok.text else "end of input"
        self.fail(f"expected an expression, found {found}")


def parse(text: str) -> Program:
    """Parse and type-check a heuristic program.

    Raises ParseError (with location), UnknownIdentifier, DslTypeError, or
    LimitExceeded.
    """
    return _Parser(text).parse_program()
