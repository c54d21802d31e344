"""Tokenizer shared by the model, temporal-logic, task and query parsers.

Unicode symbols and their ASCII spellings are folded to one canonical
token value, so every parser sees ``&`` for both ``∧`` and ``&``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SyntaxError_

_UNICODE = {
    "∧": "&", "∨": "or", "¬": "not", "⇒": "=>", "⟹": "=>", "→": "=>",
    "⇔": "<=>", "⟺": "<=>", "↔": "<=>", "≠": "/=", "≤": "<=", "≥": ">=",
    "∈": ":", "∉": "/:", "↦": "|->", "∪": "union", "∩": "inter", "⊆": "<:",
    "⊂": "<<:", "⟨": "⟨", "〈": "⟨", "⟩": "⟩", "〉": "⟩", "−": "-", "∼": "~",
}

# longest spelling first
_ASCII = [
    ("<<:", "<<:"), ("|->", "|->"), ("<=>", "<=>"), ("=>", "=>"), ("<=", "<="),
    (">=", ">="), ("/=", "/="), ("!=", "/="), ("/:", "/:"), (":=", ":="),
    ("||", "||"), ("..", ".."), ("<:", "<:"), ("\\/", "union"), ("/\\", "inter"),
    ("=", "="), ("<", "<"), (">", ">"), (":", ":"), ("&", "&"), ("!", "not"),
    ("~", "~"), (",", ","), (";", ";"), ("(", "("), (")", ")"), ("{", "{"),
    ("}", "}"), ("[", "["), ("]", "]"), ("+", "+"), ("-", "-"), ("*", "*"),
    ("/", "/"), ("|", "|"), (".", "."),
]


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "num", "str", "op", "eof"
    value: str
    line: int
    col: int
    pos: int  # offset into the source text
    end: int = -1

    def is_op(self, *values: str) -> bool:
        return self.kind == "op" and self.value in values

    def is_id(self, *values: str) -> bool:
        return self.kind == "id" and (not values or self.value in values)


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    """Split ``text`` into tokens; the last token is always ``eof``."""
    toks: list[Token] = []
    i, n = 0, len(text)
    ln, cl = line, col

    def advance(k: int) -> None:
        nonlocal i, ln, cl
        for ch in text[i:i + k]:
            if ch == "\n":
                ln += 1
                cl = 1
            else:
                cl += 1
        i += k

    def emit(kind: str, value: str, sl: int, sc: int, start: int, width: int) -> None:
        toks.append(Token(kind, value, sl, sc, start, start + width))
        advance(width)

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise SyntaxError_("unterminated comment", ln, cl)
            advance(end + 2 - i)
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            advance((n if end < 0 else end) - i)
            continue
        start_ln, start_cl, start = ln, cl, i
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            emit("num", text[i:j], start_ln, start_cl, start, j - i)
            continue
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            emit("id", text[i:j], start_ln, start_cl, start, j - i)
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise SyntaxError_("unterminated string", ln, cl)
            emit("str", text[i + 1:j], start_ln, start_cl, start, j + 1 - i)
            continue
        if text.startswith("⁻¹", i):
            emit("op", "~", start_ln, start_cl, start, 2)
            continue
        if ch in _UNICODE:
            emit("op", _UNICODE[ch], start_ln, start_cl, start, 1)
            continue
        for spelling, canon in _ASCII:
            if text.startswith(spelling, i):
                emit("op", canon, start_ln, start_cl, start, len(spelling))
                break
        else:
            raise SyntaxError_(f"unexpected character {ch!r}", ln, cl)
    toks.append(Token("eof", "", ln, cl, n, n))
    return toks


class TokenStream:
    """Cursor over a token list with the usual peek/expect helpers."""

    def __init__(self, tokens: list[Token], text: str = ""):
        self.toks = tokens
        self.i = 0
        self.text = text

    @classmethod
    def of(cls, text: str) -> "TokenStream":
        return cls(tokenize(text), text)

    def peek(self, k: int = 0) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    def accept_op(self, *values: str) -> Token | None:
        if self.peek().is_op(*values):
            return self.next()
        return None

    def accept_id(self, *values: str) -> Token | None:
        if self.peek().is_id(*values):
            return self.next()
        return None

    def expect_op(self, *values: str) -> Token:
        t = self.peek()
        if not t.is_op(*values):
            self.fail(f"expected {' or '.join(repr(v) for v in values)}")
        return self.next()

    def expect_id(self, *values: str) -> Token:
        t = self.peek()
        if not t.is_id(*values):
            want = " or ".join(values) if values else "identifier"
            self.fail(f"expected {want}")
        return self.next()

    def expect_end(self) -> None:
        if not self.at_end():
            self.fail("unexpected trailing input")

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.peek()
        found = "end of input" if t.kind == "eof" else repr(t.value)
        raise SyntaxError_(f"{message}, found {found}", t.line, t.col)

    def source_between(self, start: int, end: int) -> str:
        """Raw source text spanned by tokens ``start`` (inclusive) to ``end`` (exclusive)."""
        if end <= start:
            return ""
        return self.text[self.toks[start].pos:self.toks[end - 1].end]
