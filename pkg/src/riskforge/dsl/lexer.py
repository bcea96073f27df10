"""Tokenizer for the .rsk scenario language.

Keywords are contextual: the lexer only distinguishes identifiers, numbers,
strings, and punctuation. ``#`` starts a comment running to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from ..errors import ParseError, SourceSpan


class TokenType(Enum):
    IDENT = "identifier"
    NUMBER = "number"
    STRING = "string"
    PUNCT = "punctuation"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    type: TokenType
    text: str
    line: int
    column: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.column)


# Identifiers: a letter, then letters/digits/underscore/hyphen (case-sensitive).
_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")
# Decimal numbers with optional sign and exponent; no locale separators.
_NUMBER_RE = re.compile(r"-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")

_TWO_CHAR_PUNCT = ("<=", ">=")
_ONE_CHAR_PUNCT = "{}(),=:~/<>"

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    """Produce the token stream, ending with a single EOF token.

    Raises ParseError at the first lexical violation.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def error(message: str) -> ParseError:
        return ParseError(SourceSpan(file, line, col), message)

    while i < n:
        ch = text[i]
        if ch == "\r":
            # CRLF accepted; bare CR treated as a line break too
            if i + 1 < n and text[i + 1] == "\n":
                i += 1
            i += 1
            line += 1
            col = 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] not in "\r\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf: list[str] = []
            while True:
                if i >= n or text[i] in "\r\n":
                    raise ParseError(SourceSpan(file, start_line, start_col), "unterminated string")
                c = text[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError(SourceSpan(file, start_line, start_col), "unterminated string")
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        raise ParseError(SourceSpan(file, line, col), f"invalid escape sequence \\{esc}")
                    buf.append(_ESCAPES[esc])
                    i += 2
                    col += 2
                    continue
                buf.append(c)
                i += 1
                col += 1
            tokens.append(Token(TokenType.STRING, "".join(buf), start_line, start_col))
            continue
        m = _NUMBER_RE.match(text, i)
        if m and (ch.isdigit() or ch == "." or (ch == "-" and len(m.group()) > 1)):
            tokens.append(Token(TokenType.NUMBER, m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token(TokenType.IDENT, m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR_PUNCT:
            tokens.append(Token(TokenType.PUNCT, two, line, col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_PUNCT:
            tokens.append(Token(TokenType.PUNCT, ch, line, col))
            i += 1
            col += 1
            continue
        raise error(f"unexpected character {ch!r}")

    tokens.append(Token(TokenType.EOF, "", line, col))
    return tokens
