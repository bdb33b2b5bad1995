"""
S-expression reader for SMT-LIB 2.6 / SyGuS-IF 2.0 text
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Union

from models.exceptions import ParseError


class TokenKind(Enum):
    OPEN = "("
    CLOSE = ")"
    SYMBOL = "symbol"
    KEYWORD = "keyword"
    NUMERAL = "numeral"
    DECIMAL = "decimal"
    BINARY = "binary"
    HEXADECIMAL = "hexadecimal"
    STRING = "string"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    def __str__(self) -> str:
        return self.text


class SList(list):
    """Parenthesized list remembering where it opened"""

    def __init__(self, items, line: int, column: int):
        super().__init__(items)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        return "(" + " ".join(str(item) for item in self) + ")"


SExpr = Union[Token, SList]

_SYMBOL_CHARS = re.compile(r"[A-Za-z0-9~!@$%^&*_\-+=<>.?/']")
_UNICODE_ESCAPE = re.compile(r"\\u\{([0-9a-fA-F]{1,5})\}|\\u([0-9a-fA-F]{4})")


def decode_string_literal(body: str) -> str:
    """Interpret SMT-LIB 2.6 \\u escapes inside an already unquoted literal"""
    return _UNICODE_ESCAPE.sub(lambda m: chr(int(m.group(1) or m.group(2), 16)), body)


def tokenize(text: str) -> Iterator[Token]:
    """
    Split SMT-LIB text into tokens

    Args:
        text: Source text

    Yields:
        Token: positioned tokens

    Raises:
        ParseError: on unterminated literals or stray characters
    """
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f":
            advance(1)
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        start_line, start_col = line, col
        if ch == "(":
            advance(1)
            yield Token(TokenKind.OPEN, "(", start_line, start_col)
        elif ch == ")":
            advance(1)
            yield Token(TokenKind.CLOSE, ")", start_line, start_col)
        elif ch == '"':
            advance(1)
            chars: List[str] = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string literal", start_line, start_col)
                if text[i] == '"':
                    if i + 1 < n and text[i + 1] == '"':
                        chars.append('"')
                        advance(2)
                        continue
                    advance(1)
                    break
                chars.append(text[i])
                advance(1)
            yield Token(TokenKind.STRING, decode_string_literal("".join(chars)), start_line, start_col)
        elif ch == "|":
            end = text.find("|", i + 1)
            if end < 0:
                raise ParseError("unterminated quoted symbol", start_line, start_col)
            body = text[i + 1:end]
            advance(end + 1 - i)
            yield Token(TokenKind.SYMBOL, body, start_line, start_col)
        elif ch == "#":
            j = i + 2
            if i + 1 < n and text[i + 1] == "b":
                while j < n and text[j] in "01":
                    j += 1
                kind = TokenKind.BINARY
            elif i + 1 < n and text[i + 1] == "x":
                while j < n and text[j] in "0123456789abcdefABCDEF":
                    j += 1
                kind = TokenKind.HEXADECIMAL
            else:
                raise ParseError(f"unexpected character {ch!r}", start_line, start_col)
            if j == i + 2:
                raise ParseError("empty bitvector literal", start_line, start_col)
            body = text[i:j]
            advance(j - i)
            yield Token(kind, body, start_line, start_col)
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            kind = TokenKind.NUMERAL
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                kind = TokenKind.DECIMAL
            body = text[i:j]
            advance(j - i)
            yield Token(kind, body, start_line, start_col)
        elif ch == ":" or _SYMBOL_CHARS.match(ch):
            j = i + 1
            while j < n and _SYMBOL_CHARS.match(text[j]):
                j += 1
            body = text[i:j]
            advance(j - i)
            kind = TokenKind.KEYWORD if ch == ":" else TokenKind.SYMBOL
            yield Token(kind, body, start_line, start_col)
        else:
            raise ParseError(f"unexpected character {ch!r}", start_line, start_col)


def read_all(text: str) -> List[SExpr]:
    """
    Read every top-level s-expression in text

    Args:
        text: Source text

    Returns:
        List[SExpr]: top-level tokens and lists in order

    Raises:
        ParseError: on unbalanced parentheses
    """
    stack: List[SList] = []
    result: List[SExpr] = []
    for token in tokenize(text):
        if token.kind is TokenKind.OPEN:
            stack.append(SList([], token.line, token.column))
        elif token.kind is TokenKind.CLOSE:
            if not stack:
                raise ParseError("unexpected ')'", token.line, token.column)
            done = stack.pop()
            (stack[-1] if stack else result).append(done)
        else:
            (stack[-1] if stack else result).append(token)
    if stack:
        raise ParseError("unexpected end of input: unbalanced '('", stack[-1].line, stack[-1].column)
    return result


def is_symbol(expr: SExpr, text: str = None) -> bool:
    return isinstance(expr, Token) and expr.kind is TokenKind.SYMBOL and (text is None or expr.text == text)
