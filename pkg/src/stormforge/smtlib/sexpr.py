"""S-expression reader for SMT-LIB v2 text.

Atoms keep their source spelling so that literals print back exactly as
they were read.  Lists are plain tuples of nodes tagged with a position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from stormforge.errors import ParseError

SYMBOL = "symbol"
KEYWORD = "keyword"
NUMERAL = "numeral"
DECIMAL = "decimal"
HEX = "hex"
BINARY = "binary"
STRING = "string"

_SIMPLE_SYMBOL_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    "~!@$%^&*_-+=<>.?/"
)
_DELIMITERS = frozenset('()";|') | frozenset(" \t\r\n\f\v")


@dataclass(frozen=True)
class Atom:
    kind: str
    text: str  # symbol content without |bars|; literals as written
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __str__(self) -> str:
        if self.kind == SYMBOL:
            return quote_symbol(self.text)
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)

    def __str__(self) -> str:
        return "(" + " ".join(str(x) for x in self.items) + ")"


SExpr = Union[Atom, SList]


def is_simple_symbol(name: str) -> bool:
    return (
        bool(name)
        and not name[0].isdigit()
        and all(c in _SIMPLE_SYMBOL_CHARS for c in name)
    )


def quote_symbol(name: str) -> str:
    if is_simple_symbol(name):
        return name
    return "|" + name + "|"


def is_symbol(e: SExpr, text: str | None = None) -> bool:
    return isinstance(e, Atom) and e.kind == SYMBOL and (text is None or e.text == text)


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _error(self, msg: str, line: int | None = None, col: int | None = None):
        return ParseError(line or self.line, col or self.col, msg)

    def tokens(self) -> Iterator[tuple]:
        text = self.text
        n = len(text)
        while self.pos < n:
            c = text[self.pos]
            if c in " \t\r\n\f\v":
                self._advance()
                continue
            if c == ";":
                while self.pos < n and text[self.pos] != "\n":
                    self._advance()
                continue
            line, col = self.line, self.col
            if c == "(" or c == ")":
                self._advance()
                yield (c, None, line, col)
                continue
            if c == '"':
                yield ("atom", self._string(line, col), line, col)
                continue
            if c == "|":
                end = text.find("|", self.pos + 1)
                if end < 0:
                    raise self._error("unterminated quoted symbol", line, col)
                content = text[self.pos + 1 : end]
                if "\\" in content:
                    raise self._error("backslash in quoted symbol", line, col)
                self._advance(end + 1 - self.pos)
                yield ("atom", Atom(SYMBOL, content, line, col), line, col)
                continue
            start = self.pos
            while self.pos < n and text[self.pos] not in _DELIMITERS:
                self._advance()
            word = text[start : self.pos]
            yield ("atom", self._classify(word, line, col), line, col)

    def _string(self, line: int, col: int) -> Atom:
        text = self.text
        i = self.pos + 1
        while True:
            j = text.find('"', i)
            if j < 0:
                raise self._error("unterminated string literal", line, col)
            if j + 1 < len(text) and text[j + 1] == '"':
                i = j + 2
                continue
            break
        raw = text[self.pos : j + 1]
        self._advance(j + 1 - self.pos)
        return Atom(STRING, raw, line, col)

    def _classify(self, word: str, line: int, col: int) -> Atom:
        if word.startswith(":"):
            if len(word) == 1:
                raise self._error("empty keyword", line, col)
            return Atom(KEYWORD, word, line, col)
        if word[0].isdigit():
            if word.isdigit():
                if len(word) > 1 and word[0] == "0":
                    raise self._error(f"numeral with leading zero: {word}", line, col)
                return Atom(NUMERAL, word, line, col)
            head, dot, tail = word.partition(".")
            if dot and head.isdigit() and tail.isdigit():
                return Atom(DECIMAL, word, line, col)
            raise self._error(f"malformed numeric literal: {word}", line, col)
        if word.startswith("#x"):
            if len(word) > 2 and all(c in "0123456789abcdefABCDEF" for c in word[2:]):
                return Atom(HEX, word, line, col)
            raise self._error(f"malformed hexadecimal literal: {word}", line, col)
        if word.startswith("#b"):
            if len(word) > 2 and all(c in "01" for c in word[2:]):
                return Atom(BINARY, word, line, col)
            raise self._error(f"malformed binary literal: {word}", line, col)
        if not is_simple_symbol(word):
            raise self._error(f"illegal symbol: {word}", line, col)
        return Atom(SYMBOL, word, line, col)


def read_all(text: str) -> list[SExpr]:
    """Read every top-level s-expression in ``text``."""
    stack: list[tuple[list, int, int]] = []
    out: list[SExpr] = []
    lexer = _Lexer(text)
    for kind, atom, line, col in lexer.tokens():
        if kind == "(":
            stack.append(([], line, col))
        elif kind == ")":
            if not stack:
                raise ParseError(line, col, "unbalanced ')'")
            items, l0, c0 = stack.pop()
            node = SList(tuple(items), l0, c0)
            (stack[-1][0] if stack else out).append(node)
        else:
            (stack[-1][0] if stack else out).append(atom)
    if stack:
        _, l0, c0 = stack[-1]
        raise ParseError(l0, c0, "unbalanced '(': missing ')'")
    return out


def depth(e: SExpr) -> int:
    """Tree depth of an s-expression with the head of a list not counted."""
    if isinstance(e, Atom):
        return 1
    args = e.items[1:] if e.items and isinstance(e.items[0], Atom) else e.items
    if not args:
        return 1
    return 1 + max(depth(a) for a in args)


def count_nodes(e: SExpr) -> int:
    if isinstance(e, Atom):
        return 1
    return 1 + sum(count_nodes(x) for x in e.items)
