"""Lexer for the C-like subset scored by the metrics.

The lexer is total: comments and whitespace are dropped, everything else is
attributed to exactly one token, and bytes it does not understand come back
as single-character punctuation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORD = "keyword"
IDENTIFIER = "identifier"
NUMBER = "number-literal"
STRING = "string-literal"
CHAR = "char-literal"
OPERATOR = "operator"
PUNCTUATION = "punctuation"

TOKEN_KINDS = (KEYWORD, IDENTIFIER, NUMBER, STRING, CHAR, OPERATOR, PUNCTUATION)

C_KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    bool true false nullptr
    """.split()
)

# Longest match first; anything else in OPERATOR_CHARS is a one-char operator.
MULTI_CHAR_OPERATORS = (
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=",
)
OPERATOR_CHARS = frozenset("+-*/%=<>!~&|^?:.")
PUNCTUATION_CHARS = frozenset(";,(){}[]")

_MASTER = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?(?:\*/|\Z))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>\.?[0-9](?:[eEpP][+-]|[A-Za-z0-9_.])*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)*')
  | (?P<op>%s)
    """
    % "|".join(re.escape(op) for op in MULTI_CHAR_OPERATORS),
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    column: int
    offset: int = -1

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r}, {self.line}:{self.column})"


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens. Never raises."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _MASTER.match(text, pos)
        if m is not None:
            group = m.lastgroup
            lexeme = m.group()
            if group == "ident":
                kind = KEYWORD if lexeme in C_KEYWORDS else IDENTIFIER
            elif group == "number":
                kind = NUMBER
            elif group == "string":
                kind = STRING
            elif group == "char":
                kind = CHAR
            elif group == "op":
                kind = OPERATOR
            else:
                kind = None
            if kind is not None:
                tokens.append(Token(kind, lexeme, line, pos - line_start + 1, pos))
            end = m.end()
        else:
            ch = text[pos]
            kind = OPERATOR if ch in OPERATOR_CHARS else PUNCTUATION
            tokens.append(Token(kind, ch, line, pos - line_start + 1, pos))
            end = pos + 1
        newlines = text.count("\n", pos, end)
        if newlines:
            line += newlines
            line_start = text.rindex("\n", pos, end) + 1
        pos = end
    return tokens


def detokenize(tokens: list[Token]) -> str:
    """Join lexemes with single spaces.

    A stray quote character (an unterminated literal) is followed by a newline
    instead, so that retokenizing cannot fuse it with a later stray quote.
    """
    parts: list[str] = []
    for i, tok in enumerate(tokens):
        if i:
            prev = tokens[i - 1].lexeme
            parts.append("\n" if prev in ("'", '"') else " ")
        parts.append(tok.lexeme)
    return "".join(parts)


def lexemes(tokens: list[Token]) -> list[str]:
    return [t.lexeme for t in tokens]
