"""Command-level AST for CHC benchmark scripts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .sexpr import (
    KEYWORD,
    NUMERAL,
    ParseError,
    SAtom,
    SExpr,
    SList,
    is_symbol,
    pretty,
    read_all,
    sym,
)
from .terms import (
    Sort,
    Term,
    sort_from_sexpr,
    sort_to_sexpr,
    symbol_name,
    term_from_sexpr,
    term_to_sexpr,
)


class ParametricDatatypeError(ParseError):
    """A ``declare-datatypes`` sort with a nonzero parameter count."""


@dataclass(frozen=True)
class Constructor:
    name: str
    selectors: tuple[tuple[str, Sort], ...] = ()


@dataclass(frozen=True)
class DatatypeDecl:
    name: str
    constructors: tuple[Constructor, ...]

    def field_sorts(self):
        for c in self.constructors:
            for _, s in c.selectors:
                yield s


@dataclass(frozen=True)
class SetLogic:
    name: str


@dataclass(frozen=True)
class SetInfo:
    keyword: str
    value: Optional[SExpr] = None


@dataclass(frozen=True)
class DeclareFun:
    name: str
    args: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class DeclareDatatypes:
    """One ``declare-datatypes`` command, i.e. one declaration group."""

    decls: tuple[DatatypeDecl, ...]


@dataclass(frozen=True)
class Assert:
    term: Term


@dataclass(frozen=True)
class CheckSat:
    pass


@dataclass(frozen=True)
class Exit:
    pass


@dataclass(frozen=True)
class GetModel:
    pass


@dataclass(frozen=True)
class Unsupported:
    raw: SExpr


Command = Union[
    SetLogic, SetInfo, DeclareFun, DeclareDatatypes, Assert, CheckSat, Exit, GetModel, Unsupported
]


@dataclass(frozen=True)
class Script:
    commands: tuple[Command, ...]

    def of_type(self, cls):
        return [c for c in self.commands if isinstance(c, cls)]

    @property
    def datatypes(self) -> list[DatatypeDecl]:
        return [d for c in self.commands if isinstance(c, DeclareDatatypes) for d in c.decls]


# --- parsing -----------------------------------------------------------------


def _parse_constructor(e: SExpr) -> Constructor:
    # a bare symbol is accepted as a nullary constructor
    if is_symbol(e):
        return Constructor(e.value)
    if not isinstance(e, SList) or len(e) == 0:
        raise ParseError(f"malformed constructor {e}", *e.loc)
    if is_symbol(e[0], "par"):
        raise ParametricDatatypeError(f"parametric constructor declaration {e}", *e.loc)
    name = symbol_name(e[0], "constructor name")
    sels = []
    for s in e.items[1:]:
        if not (isinstance(s, SList) and len(s) == 2):
            raise ParseError(f"malformed selector {s}", *s.loc)
        sels.append((symbol_name(s[0], "selector name"), sort_from_sexpr(s[1])))
    return Constructor(name, tuple(sels))


def _parse_datatypes(e: SList) -> DeclareDatatypes:
    if len(e) != 3 or not isinstance(e[1], SList) or not isinstance(e[2], SList):
        raise ParseError("malformed declare-datatypes", *e.loc)
    heads, bodies = e[1], e[2]
    if len(heads) != len(bodies):
        raise ParseError("declare-datatypes: sort and constructor list counts differ", *e.loc)
    decls = []
    for head, body in zip(heads, bodies):
        if not (isinstance(head, SList) and len(head) == 2 and isinstance(head[1], SAtom)
                and head[1].kind == NUMERAL):
            raise ParseError(f"malformed sort declaration {head}", *head.loc)
        name = symbol_name(head[0], "datatype name")
        if head[1].value != 0:
            raise ParametricDatatypeError(
                f"datatype {name} has {head[1].value} sort parameter(s)", *head.loc)
        if isinstance(body, SList) and len(body) and is_symbol(body[0], "par"):
            raise ParametricDatatypeError(f"datatype {name} uses par", *body.loc)
        if not isinstance(body, SList) or len(body) == 0:
            raise ParseError(f"datatype {name} has no constructors", *body.loc)
        decls.append(DatatypeDecl(name, tuple(_parse_constructor(c) for c in body)))
    names = [c.name for d in decls for c in d.constructors]
    names += [s for d in decls for c in d.constructors for s, _ in c.selectors]
    if len(names) != len(set(names)):
        raise ParseError("duplicate constructor or selector name in declare-datatypes", *e.loc)
    return DeclareDatatypes(tuple(decls))


def _command(e: SExpr) -> Command:
    if not isinstance(e, SList) or len(e) == 0 or not is_symbol(e[0]):
        raise ParseError(f"malformed command {e}", *e.loc)
    name = e[0].value
    n = len(e)
    if name == "set-logic":
        if n != 2:
            raise ParseError("malformed set-logic", *e.loc)
        return SetLogic(symbol_name(e[1], "logic name"))
    if name == "set-info":
        if n not in (2, 3) or not (isinstance(e[1], SAtom) and e[1].kind == KEYWORD):
            raise ParseError("malformed set-info", *e.loc)
        return SetInfo(e[1].value, e[2] if n == 3 else None)
    if name == "declare-fun":
        if n != 4 or not isinstance(e[2], SList):
            raise ParseError("malformed declare-fun", *e.loc)
        return DeclareFun(symbol_name(e[1], "function name"),
                          tuple(sort_from_sexpr(s) for s in e[2]), sort_from_sexpr(e[3]))
    if name == "declare-datatypes":
        return _parse_datatypes(e)
    if name == "assert":
        if n != 2:
            raise ParseError("malformed assert", *e.loc)
        return Assert(term_from_sexpr(e[1]))
    nullary = {"check-sat": CheckSat, "exit": Exit, "get-model": GetModel}
    if name in nullary:
        if n != 1:
            raise ParseError(f"malformed {name}", *e.loc)
        return nullary[name]()
    return Unsupported(e)


def parse_script(text: str) -> Script:
    commands = tuple(_command(e) for e in read_all(text))
    logics = [c for c in commands if isinstance(c, SetLogic)]
    if len(logics) > 1:
        raise ParseError("more than one set-logic command")
    return Script(commands)


def parse_file(path) -> Script:
    with open(path, encoding="utf-8") as fh:
        return parse_script(fh.read())


# --- printing ----------------------------------------------------------------


def _sel(name: str, s: Sort) -> SList:
    return SList((sym(name), sort_to_sexpr(s)))


def datatypes_to_sexpr(cmd: DeclareDatatypes) -> SList:
    heads = SList(tuple(SList((sym(d.name), SAtom(NUMERAL, 0))) for d in cmd.decls))
    bodies = SList(tuple(
        SList(tuple(SList((sym(c.name),) + tuple(_sel(n, s) for n, s in c.selectors))
                    for c in d.constructors))
        for d in cmd.decls))
    return SList((sym("declare-datatypes"), heads, bodies))


def command_to_sexpr(c: Command) -> SExpr:
    if isinstance(c, SetLogic):
        return SList((sym("set-logic"), sym(c.name)))
    if isinstance(c, SetInfo):
        kw = SAtom(KEYWORD, c.keyword)
        return SList((sym("set-info"), kw) + ((c.value,) if c.value is not None else ()))
    if isinstance(c, DeclareFun):
        return SList((sym("declare-fun"), sym(c.name),
                      SList(tuple(sort_to_sexpr(s) for s in c.args)), sort_to_sexpr(c.result)))
    if isinstance(c, DeclareDatatypes):
        return datatypes_to_sexpr(c)
    if isinstance(c, Assert):
        return SList((sym("assert"), term_to_sexpr(c.term)))
    if isinstance(c, CheckSat):
        return SList((sym("check-sat"),))
    if isinstance(c, Exit):
        return SList((sym("exit"),))
    if isinstance(c, GetModel):
        return SList((sym("get-model"),))
    if isinstance(c, Unsupported):
        return c.raw
    raise TypeError(f"not a command: {c!r}")


def print_script(script: Script, width: int = 80) -> str:
    return "".join(pretty(command_to_sexpr(c), width) + "\n" for c in script.commands)
