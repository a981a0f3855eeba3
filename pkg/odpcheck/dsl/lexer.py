"""Tokenizer for the model, system and trace languages.

The lexer never raises: unexpected characters and unterminated literals are
reported into the ``ParseReport`` and skipped.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import List

from odpcheck.dsl.spans import ParseReport, SourceSpan


class TT:
    """Token types."""
    EOF = "EOF"
    IDENT = "IDENT"
    KEYWORD = "KEYWORD"
    INT = "INT"
    STRING = "STRING"
    OBJREF = "OBJREF"
    PUNCT = "PUNCT"


KEYWORDS = frozenset({
    "model", "template", "action", "type", "role", "invariant", "static", "dynamic",
    "rule", "system", "conforms", "object", "link", "unlink", "time", "node", "capsule",
    "cluster", "travel", "trace", "step", "true", "false", "and", "or", "not", "implies",
    "forall", "exists", "create", "delete", "reclassify", "as", "at",
})

# unicode spellings accepted on input, printed in ASCII
_ALIASES = {"≠": "<>", "≤": "<=", "≥": ">=", "×": "*", "⁻¹": "~"}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n\ufeff]+)
    | (?P<line_comment>//[^\n]*)
    | (?P<block_comment>/\*.*?\*/)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<int>\d+)
    | (?P<objref>@[A-Za-z_][A-Za-z0-9_]*)
    | (?P<scope>per-source\b)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>\.\.|->|:=|<>|<=|>=|⁻¹|[{}();:,.=<>+\-*~≠≤≥×])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    span: SourceSpan

    @property
    def line(self) -> int:
        return self.span.start_line

    @property
    def col(self) -> int:
        return self.span.start_col

    def is_(self, type_: str, value: str | None = None) -> bool:
        return self.type == type_ and (value is None or self.value == value)

    def __repr__(self):
        return f"Token({self.type}, {self.value!r}, {self.line}:{self.col})"


class _Cursor:
    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1

    def span_of(self, lexeme: str) -> SourceSpan:
        end_line, end_col = self.line, self.col
        for ch in lexeme[:-1]:
            if ch == "\n":
                end_line, end_col = end_line + 1, 1
            else:
                end_col += 1
        return SourceSpan(self.file, self.line, self.col, end_line, end_col)

    def advance(self, lexeme: str) -> None:
        self.pos += len(lexeme)
        newlines = lexeme.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(lexeme) - lexeme.rfind("\n")
        else:
            self.col += len(lexeme)


def tokenize(text: str, file: str, report: ParseReport) -> List[Token]:
    cur = _Cursor(text, file)
    tokens: List[Token] = []
    while cur.pos < len(text):
        m = _TOKEN_RE.match(text, cur.pos)
        if m is None:
            rest = text[cur.pos:]
            if rest.startswith("/*"):
                report.error(cur.span_of("/*"), "unterminated block comment")
                break
            if rest.startswith('"'):
                lexeme = rest.split("\n", 1)[0]
                report.error(cur.span_of(lexeme), "unterminated string literal")
                cur.advance(lexeme)
                continue
            report.error(cur.span_of(rest[0]), f"unexpected character {rest[0]!r}")
            cur.advance(rest[0])
            continue
        kind = m.lastgroup
        lexeme = m.group()
        span = cur.span_of(lexeme)
        if kind == "string":
            try:
                value = json.loads(lexeme, strict=False)
            except ValueError:
                report.error(span, "invalid escape in string literal")
                value = lexeme[1:-1]
            tokens.append(Token(TT.STRING, value, span))
        elif kind == "int":
            tokens.append(Token(TT.INT, lexeme, span))
        elif kind == "objref":
            tokens.append(Token(TT.OBJREF, lexeme[1:], span))
        elif kind == "scope":
            tokens.append(Token(TT.IDENT, lexeme, span))
        elif kind == "ident":
            tokens.append(Token(TT.KEYWORD if lexeme in KEYWORDS else TT.IDENT, lexeme, span))
        elif kind == "punct":
            tokens.append(Token(TT.PUNCT, _ALIASES.get(lexeme, lexeme), span))
        cur.advance(lexeme)
    tokens.append(Token(TT.EOF, "", SourceSpan(file, cur.line, cur.col, cur.line, cur.col)))
    return tokens


def quote(value: str) -> str:
    """String literal in the concrete syntax."""
    return json.dumps(value, ensure_ascii=False)
