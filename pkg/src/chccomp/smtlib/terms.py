"""Sorts and terms of the CHC subset, with conversion to and from s-expressions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Union

from .sexpr import (
    DECIMAL,
    NUMERAL,
    SYMBOL,
    ParseError,
    SAtom,
    SExpr,
    SList,
    is_symbol,
    sym,
)


@dataclass(frozen=True)
class Sort:
    """A sort; ``name`` is an :class:`SList` for indexed sorts such as ``(_ BitVec 32)``."""

    name: Union[str, SList]
    args: tuple["Sort", ...] = ()

    def __str__(self) -> str:
        return str(sort_to_sexpr(self))

    def walk(self) -> Iterator["Sort"]:
        yield self
        for a in self.args:
            yield from a.walk()


BOOL = Sort("Bool")
INT = Sort("Int")


@dataclass(frozen=True)
class Sym:
    """Reference to a variable or a nullary symbol (``true``, a constructor, a predicate)."""

    name: Union[str, SList]


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Lit:
    """Non-integer literal kept verbatim: decimal, string, ``#x``/``#b`` constants."""

    kind: str
    text: str


@dataclass(frozen=True)
class App:
    fn: Union[str, SList]
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" | "exists"
    vars: tuple[tuple[str, Sort], ...]
    body: "Term"


@dataclass(frozen=True)
class Let:
    bindings: tuple[tuple[str, "Term"], ...]
    body: "Term"


@dataclass(frozen=True)
class Annot:
    """``(! term :attr ...)``; attributes are kept as raw s-expressions."""

    term: "Term"
    attrs: tuple[SExpr, ...]


Term = Union[Sym, Num, Lit, App, Quant, Let, Annot]

TRUE = Sym("true")
FALSE = Sym("false")


def app(fn: str, *args: Term) -> App:
    return App(fn, tuple(args))


# --- conversion -------------------------------------------------------------


def _err(msg: str, e: SExpr) -> ParseError:
    return ParseError(msg, *e.loc) if e.loc != (0, 0) else ParseError(msg)


def symbol_name(e: SExpr, what: str = "symbol") -> str:
    if not is_symbol(e):
        raise _err(f"expected {what}, got {e}", e)
    return e.value


def sort_from_sexpr(e: SExpr) -> Sort:
    if is_symbol(e):
        return Sort(e.value)
    if isinstance(e, SList) and len(e) >= 2:
        head = e[0]
        if is_symbol(head, "_"):
            return Sort(e)
        if is_symbol(head):
            return Sort(head.value, tuple(sort_from_sexpr(a) for a in e.items[1:]))
    raise _err(f"malformed sort {e}", e)


def sort_to_sexpr(s: Sort) -> SExpr:
    head = s.name if isinstance(s.name, SList) else sym(s.name)
    if not s.args:
        return head
    return SList((head,) + tuple(sort_to_sexpr(a) for a in s.args))


def _sorted_vars(e: SExpr) -> tuple[tuple[str, Sort], ...]:
    if not isinstance(e, SList):
        raise _err("expected a sorted variable list", e)
    out = []
    for item in e:
        if not (isinstance(item, SList) and len(item) == 2):
            raise _err(f"malformed sorted variable {item}", item)
        out.append((symbol_name(item[0], "variable name"), sort_from_sexpr(item[1])))
    return tuple(out)


def _is_qualified_ident(e: SExpr) -> bool:
    return isinstance(e, SList) and len(e) >= 2 and (is_symbol(e[0], "_") or is_symbol(e[0], "as"))


def term_from_sexpr(e: SExpr) -> Term:
    if isinstance(e, SAtom):
        if e.kind == SYMBOL:
            return Sym(e.value)
        if e.kind == NUMERAL:
            return Num(e.value)
        if e.kind == DECIMAL or e.kind in ("string", "hex", "binary"):
            return Lit(e.kind, e.value)
        raise _err(f"unexpected {e.kind} {e} in term position", e)
    if len(e) == 0:
        raise _err("empty application", e)
    if _is_qualified_ident(e):
        return Sym(e)
    head = e[0]
    if is_symbol(head, "forall") or is_symbol(head, "exists"):
        if len(e) != 3:
            raise _err(f"malformed {head.value}", e)
        return Quant(head.value, _sorted_vars(e[1]), term_from_sexpr(e[2]))
    if is_symbol(head, "let"):
        if len(e) != 3 or not isinstance(e[1], SList):
            raise _err("malformed let", e)
        binds = []
        for b in e[1]:
            if not (isinstance(b, SList) and len(b) == 2):
                raise _err(f"malformed let binding {b}", b)
            binds.append((symbol_name(b[0], "let variable"), term_from_sexpr(b[1])))
        return Let(tuple(binds), term_from_sexpr(e[2]))
    if is_symbol(head, "!"):
        if len(e) < 2:
            raise _err("malformed annotation", e)
        return Annot(term_from_sexpr(e[1]), tuple(e.items[2:]))
    if len(e) < 2:
        raise _err(f"application without arguments {e}", e)
    if is_symbol(head):
        fn: Union[str, SList] = head.value
    elif _is_qualified_ident(head):
        fn = head
    else:
        raise _err(f"malformed function symbol {head}", head)
    return App(fn, tuple(term_from_sexpr(a) for a in e.items[1:]))


def _ident(name: Union[str, SList]) -> SExpr:
    return name if isinstance(name, SList) else sym(name)


def term_to_sexpr(t: Term) -> SExpr:
    if isinstance(t, Sym):
        return _ident(t.name)
    if isinstance(t, Num):
        if t.value < 0:
            return SList((sym("-"), SAtom(NUMERAL, -t.value)))
        return SAtom(NUMERAL, t.value)
    if isinstance(t, Lit):
        return SAtom(t.kind, t.text)
    if isinstance(t, App):
        return SList((_ident(t.fn),) + tuple(term_to_sexpr(a) for a in t.args))
    if isinstance(t, Quant):
        vs = SList(tuple(SList((sym(n), sort_to_sexpr(s))) for n, s in t.vars))
        return SList((sym(t.kind), vs, term_to_sexpr(t.body)))
    if isinstance(t, Let):
        bs = SList(tuple(SList((sym(n), term_to_sexpr(v))) for n, v in t.bindings))
        return SList((sym("let"), bs, term_to_sexpr(t.body)))
    if isinstance(t, Annot):
        return SList((sym("!"), term_to_sexpr(t.term)) + t.attrs)
    raise TypeError(f"not a term: {t!r}")


# --- traversal ----------------------------------------------------------------


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over every subterm, including let-bound values."""
    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, App):
            stack.extend(reversed(cur.args))
        elif isinstance(cur, Quant):
            stack.append(cur.body)
        elif isinstance(cur, Let):
            stack.append(cur.body)
            stack.extend(v for _, v in reversed(cur.bindings))
        elif isinstance(cur, Annot):
            stack.append(cur.term)


def free_symbols(t: Term, bound: frozenset[str] = frozenset()) -> set[str]:
    """Names referenced by plain :class:`Sym` nodes that no enclosing binder captures."""
    out: set[str] = set()

    def go(x: Term, bound: frozenset[str]) -> None:
        if isinstance(x, Sym):
            if isinstance(x.name, str) and x.name not in bound:
                out.add(x.name)
        elif isinstance(x, App):
            for a in x.args:
                go(a, bound)
        elif isinstance(x, Quant):
            go(x.body, bound | {n for n, _ in x.vars})
        elif isinstance(x, Let):
            for _, v in x.bindings:
                go(v, bound)
            go(x.body, bound | {n for n, _ in x.bindings})
        elif isinstance(x, Annot):
            go(x.term, bound)

    go(t, bound)
    return out


_fresh_counter = itertools.count()


def _fresh(base: str, avoid: set[str]) -> str:
    while True:
        cand = f"{base}!{next(_fresh_counter)}"
        if cand not in avoid:
            return cand


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    """Capture-avoiding substitution of free symbols."""
    if not mapping:
        return t
    if isinstance(t, Sym):
        return mapping.get(t.name, t) if isinstance(t.name, str) else t
    if isinstance(t, (Num, Lit)):
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(substitute(a, mapping) for a in t.args))
    if isinstance(t, Annot):
        return Annot(substitute(t.term, mapping), t.attrs)
    if isinstance(t, Quant):
        names = [n for n, _ in t.vars]
        inner = {k: v for k, v in mapping.items() if k not in names}
        new_vars, inner = _rename_binders(t.vars, inner, t.body)
        return Quant(t.kind, new_vars, substitute(t.body, inner))
    if isinstance(t, Let):
        binds = tuple((n, substitute(v, mapping)) for n, v in t.bindings)
        names = [n for n, _ in binds]
        inner = {k: v for k, v in mapping.items() if k not in names}
        pairs = tuple((n, None) for n in names)
        new_pairs, inner = _rename_binders(pairs, inner, t.body)
        binds = tuple((nn, v) for (nn, _), (_, v) in zip(new_pairs, binds))
        return Let(binds, substitute(t.body, inner))
    raise TypeError(f"not a term: {t!r}")


def _rename_binders(binders, mapping, body):
    """Rename binders that would capture a free symbol of the substituted values."""
    if not mapping:
        return binders, mapping
    captured: set[str] = set()
    for v in mapping.values():
        captured |= free_symbols(v)
    clash = [n for n, _ in binders if n in captured]
    if not clash:
        return binders, mapping
    avoid = captured | free_symbols(body) | set(mapping)
    renames = {n: _fresh(n, avoid) for n in clash}
    mapping = dict(mapping)
    mapping.update({old: Sym(new) for old, new in renames.items()})
    return tuple((renames.get(n, n), s) for n, s in binders), mapping


def expand_lets(t: Term) -> Term:
    """Inline every ``let`` binding (parallel-let semantics)."""
    if isinstance(t, (Sym, Num, Lit)):
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(expand_lets(a) for a in t.args))
    if isinstance(t, Annot):
        return Annot(expand_lets(t.term), t.attrs)
    if isinstance(t, Quant):
        return Quant(t.kind, t.vars, expand_lets(t.body))
    if isinstance(t, Let):
        values = {n: expand_lets(v) for n, v in t.bindings}
        return substitute(expand_lets(t.body), values)
    raise TypeError(f"not a term: {t!r}")


def map_terms(t: Term, fn: Callable[[Term], Term | None]) -> Term:
    """Bottom-up rewrite; ``fn`` returns a replacement or ``None`` to keep the node."""
    if isinstance(t, App):
        t = App(t.fn, tuple(map_terms(a, fn) for a in t.args))
    elif isinstance(t, Quant):
        t = Quant(t.kind, t.vars, map_terms(t.body, fn))
    elif isinstance(t, Let):
        t = Let(tuple((n, map_terms(v, fn)) for n, v in t.bindings), map_terms(t.body, fn))
    elif isinstance(t, Annot):
        t = Annot(map_terms(t.term, fn), t.attrs)
    out = fn(t)
    return t if out is None else out
