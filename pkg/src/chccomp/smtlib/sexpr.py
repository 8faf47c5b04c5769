"""S-expression reader and printer for SMT-LIB 2.6 text."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union


class LexError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        prefix = f"{line}:{column}: " if line else ""
        super().__init__(prefix + message)
        self.line = line
        self.column = column


SYMBOL = "symbol"
KEYWORD = "keyword"
NUMERAL = "numeral"
DECIMAL = "decimal"
STRING = "string"
HEX = "hex"
BINARY = "binary"

_SIMPLE_CHARS = r"A-Za-z0-9~!@$%^&*_\-+=<>.?/"
_PRINTABLE_SYMBOL = re.compile(rf"[A-Za-z~!@$%^&*_\-+=<>.?/][{_SIMPLE_CHARS}]*")

_TOKEN = re.compile(
    rf"""
    (?P<ws>[ \t\r\n\f]+)
  | (?P<comment>;[^\n]*)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<decimal>[0-9]+\.[0-9]+)
  | (?P<numeral>[0-9]+)(?![{_SIMPLE_CHARS}])
  | (?P<hex>\#x[0-9A-Fa-f]+)
  | (?P<binary>\#b[01]+)
  | (?P<keyword>:[{_SIMPLE_CHARS}]+)
  | (?P<symbol>[{_SIMPLE_CHARS}]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class SAtom:
    kind: str
    value: Union[str, int]
    loc: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def __str__(self) -> str:
        return atom_text(self)


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    loc: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator["SExpr"]:
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __str__(self) -> str:
        return flat(self)


SExpr = Union[SAtom, SList]


def sym(name: str) -> SAtom:
    return SAtom(SYMBOL, name)


def is_symbol(e: SExpr, name: str | None = None) -> bool:
    return isinstance(e, SAtom) and e.kind == SYMBOL and (name is None or e.value == name)


def tokenize(text: str) -> Iterator[tuple[str, object, int, int]]:
    """Yield ``(kind, value, line, column)``; comments and whitespace are dropped."""
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        col = pos - line_start + 1
        ch = text[pos]
        if ch == '"':
            end = pos + 1
            parts = []
            while True:
                nxt = text.find('"', end)
                if nxt < 0:
                    raise LexError("unterminated string literal", line, col)
                parts.append(text[end:nxt])
                if nxt + 1 < n and text[nxt + 1] == '"':
                    parts.append('"')
                    end = nxt + 2
                    continue
                end = nxt + 1
                break
            raw = text[pos:end]
            yield STRING, "".join(parts), line, col
        elif ch == "|":
            end = text.find("|", pos + 1)
            if end < 0:
                raise LexError("unterminated quoted symbol", line, col)
            value = text[pos + 1:end]
            if "\\" in value:
                raise LexError("backslash in quoted symbol", line, col)
            raw = text[pos:end + 1]
            end += 1
            yield SYMBOL, value, line, col
        else:
            m = _TOKEN.match(text, pos)
            if m is None:
                raise LexError(f"unexpected character {ch!r}", line, col)
            kind = m.lastgroup
            raw = m.group()
            end = m.end()
            if kind == "numeral":
                yield NUMERAL, int(raw), line, col
            elif kind not in ("ws", "comment"):
                yield kind, raw, line, col
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            line_start = pos + raw.rfind("\n") + 1
        pos = end


def read_all(text: str) -> list[SExpr]:
    """Read every top-level s-expression in ``text``."""
    stack: list[tuple[list, tuple[int, int]]] = []
    out: list[SExpr] = []
    for kind, value, line, col in tokenize(text):
        if kind == "lpar":
            stack.append(([], (line, col)))
            continue
        if kind == "rpar":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            items, loc = stack.pop()
            node: SExpr = SList(tuple(items), loc)
        else:
            node = SAtom(kind, value, (line, col))
        if stack:
            stack[-1][0].append(node)
        else:
            out.append(node)
    if stack:
        line, col = stack[-1][1]
        raise ParseError("unbalanced '(': missing ')'", line, col)
    return out


def symbol_text(name: str) -> str:
    if _PRINTABLE_SYMBOL.fullmatch(name):
        return name
    return f"|{name}|"


def atom_text(a: SAtom) -> str:
    if a.kind == SYMBOL:
        return symbol_text(a.value)
    if a.kind == STRING:
        return '"' + a.value.replace('"', '""') + '"'
    return str(a.value)


def flat(e: SExpr) -> str:
    if isinstance(e, SAtom):
        return atom_text(e)
    return "(" + " ".join(flat(x) for x in e.items) + ")"


def pretty(e: SExpr, width: int = 80, indent: int = 0) -> str:
    """Break lists that do not fit ``width``; children go two spaces deeper."""
    flats: dict[int, str] = {}

    def measure(x: SExpr) -> str:
        if isinstance(x, SAtom):
            return atom_text(x)
        text = "(" + " ".join(measure(c) for c in x.items) + ")"
        flats[id(x)] = text
        return text

    def render(x: SExpr, col: int) -> str:
        if isinstance(x, SAtom):
            return atom_text(x)
        text = flats[id(x)]
        if col + len(text) <= width or len(x.items) < 2:
            return text
        head, *rest = x.items
        pad = " " * (col + 2)
        lines = ["(" + render(head, col + 1)]
        lines.extend(pad + render(child, col + 2) for child in rest)
        return "\n".join(lines) + ")"

    measure(e)
    return render(e, indent)
