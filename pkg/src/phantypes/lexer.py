"""Tokenizer shared by the type parser and the project-file parser."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<tyvar>'[A-Za-z_][A-Za-z0-9_']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<number>[0-9]+)
  | (?P<punct><:|->|/\\|→|×|[{}()\[\];:,<*|=.\\])
    """,
    re.VERBOSE | re.MULTILINE,
)

_NORMALIZE = {"→": "->", "×": "*"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident, tyvar, number, string, punct, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            value = _NORMALIZE.get(m.group(), m.group())
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, text: str = "", tokens: list[Token] | None = None):
        self.tokens = tokens if tokens is not None else tokenize(text)
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "ident") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.next()

    def expect_kind(self, kind: str, what: str | None = None) -> Token:
        if self.peek().kind != kind:
            self.fail(what or kind)
        return self.next()

    def fail(self, expected: str):
        tok = self.peek()
        raise ParseError(tok.line, tok.col, expected, tok.text or "end of input")

    def at_end(self) -> bool:
        return self.peek().kind == "eof"
