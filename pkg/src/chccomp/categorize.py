"""Theory detection and competition-track assignment."""

from __future__ import annotations

import enum
import graphlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .chc import (
    ChcError,
    ChcSystem,
    Linearity,
    system_linearity,
    to_chc_system,
)
from .smtlib import (
    App,
    DatatypeDecl,
    LexError,
    Lit,
    Num,
    ParseError,
    Quant,
    Sort,
    Sym,
    Term,
    expand_lets,
    parse_file,
    subterms,
)
from .smtlib.sexpr import is_symbol
from .smtlib.terms import sort_from_sexpr


class LiaVerdict(enum.IntEnum):
    """Ordered so that ``max`` is the join: exclusion dominates."""

    NO_ARITH = 0
    PURE_LIA = 1
    SEMANTICALLY_LINEAR = 2
    EXCLUDED_NONLINEAR_ARITH = 3


class Track(str, enum.Enum):
    LIA_LIN = "LIA-lin"
    LIA_NONLIN = "LIA-nonlin"
    LIA_LIN_ARRAYS = "LIA-lin-Arrays"
    LIA_NONLIN_ARRAYS = "LIA-nonlin-Arrays"
    LIA_NONLIN_ARRAYS_NONREC_ADT = "LIA-nonlin-Arrays-nonrecADT"
    ADT_LIA_NONLIN = "ADT-LIA-nonlin"
    UNCATEGORIZED = "Uncategorized"


@dataclass(frozen=True)
class TrackAssignment:
    track: Track
    reason: str = ""

    @property
    def label(self) -> str:
        if self.track is Track.UNCATEGORIZED:
            return f"Uncategorized({' '.join(self.reason.split())})"
        return self.track.value

    @classmethod
    def uncategorized(cls, reason: str) -> "TrackAssignment":
        return cls(Track.UNCATEGORIZED, reason)


@dataclass(frozen=True)
class TheorySet:
    uses_bool: bool = False
    uses_ints: bool = False
    uses_arrays: bool = False
    uses_adts: bool = False
    adt_recursive: bool = False
    lia_verdict: LiaVerdict = LiaVerdict.NO_ARITH
    uses_reals: bool = False
    other_theories: frozenset[str] = field(default_factory=frozenset)


# --- arithmetic rules ----------------------------------------------------------

_CONSTANT_OPS = {"-", "+", "*", "div", "mod", "abs"}
_NONLINEAR_OPS = {"*", "div", "mod", "abs"}
_LIA_OPS = {"+", "-", "*", "div", "mod", "abs", "<=", "<", ">=", ">"}


def evaluate_constant(t: Term) -> Optional[int]:
    """Value of a variable-free integer term over numerals and ``- + * div mod abs``."""
    if isinstance(t, Num):
        return t.value
    if not (isinstance(t, App) and t.fn in _CONSTANT_OPS):
        return None
    vals = []
    for a in t.args:
        v = evaluate_constant(a)
        if v is None:
            return None
        vals.append(v)
    op = t.fn
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if op == "+":
        return sum(vals)
    if op == "*":
        out = 1
        for v in vals:
            out *= v
        return out
    if op == "abs":
        return abs(vals[0]) if len(vals) == 1 else None
    if len(vals) != 2 or vals[1] == 0:
        return None
    a, b = vals
    q = euclid_div(a, b)
    return q if op == "div" else a - b * q


def euclid_div(a: int, b: int) -> int:
    """Quotient q with ``a = b*q + r`` and ``0 <= r < |b|``."""
    q, r = divmod(a, b)
    if r < 0:
        # only reachable for b < 0 under Python's floor semantics
        q, r = q + 1, r - b
    return q


def arith_linearity_verdict(term: Term) -> LiaVerdict:
    verdict = LiaVerdict.NO_ARITH
    for t in subterms(expand_lets(term)):
        if isinstance(t, Num):
            verdict = max(verdict, LiaVerdict.PURE_LIA)
        if not (isinstance(t, App) and t.fn in _LIA_OPS):
            continue
        verdict = max(verdict, LiaVerdict.PURE_LIA)
        if t.fn in ("div", "mod"):
            if len(t.args) < 2 or any(evaluate_constant(a) is None for a in t.args[1:]):
                return LiaVerdict.EXCLUDED_NONLINEAR_ARITH
        elif t.fn == "*":
            if sum(evaluate_constant(a) is None for a in t.args) > 1:
                return LiaVerdict.EXCLUDED_NONLINEAR_ARITH
        if t.fn in _NONLINEAR_OPS:
            verdict = max(verdict, LiaVerdict.SEMANTICALLY_LINEAR)
    return verdict


# --- datatypes -------------------------------------------------------------------


def _sort_names(s: Sort):
    for sub in s.walk():
        if isinstance(sub.name, str):
            yield sub.name


def adt_dependencies(decls: Sequence[DatatypeDecl]) -> dict[str, set[str]]:
    """Edges ``a -> b`` where a constructor of ``a`` has a field mentioning ADT sort ``b``.

    Field sorts are searched structurally, so ``(Array Int b)`` counts as a use of ``b``.
    """
    names = {d.name for d in decls}
    graph: dict[str, set[str]] = {d.name: set() for d in decls}
    for d in decls:
        for s in d.field_sorts():
            graph[d.name].update(n for n in _sort_names(s) if n in names)
    return graph


def adt_recursive(group: Sequence[DatatypeDecl]) -> bool:
    try:
        graphlib.TopologicalSorter(adt_dependencies(group)).prepare()
    except graphlib.CycleError:
        return True
    return False


# --- theory detection -----------------------------------------------------------

_BUILTIN_SORTS = {"Bool", "Int", "Real", "Array"}


def _term_sorts(t: Term):
    for s in subterms(t):
        if isinstance(s, Quant):
            for _, srt in s.vars:
                yield srt
        for ident in ((s.fn,) if isinstance(s, App) else (s.name,) if isinstance(s, Sym) else ()):
            if not isinstance(ident, str) and len(ident) == 3 and is_symbol(ident[0], "as"):
                yield sort_from_sexpr(ident[2])


def _clause_terms(system: ChcSystem):
    for c in system.clauses:
        yield c.constraint
        for a in c.body:
            yield from a.args
        if c.head is not None:
            yield from c.head.args


def detect_theories(system: ChcSystem) -> TheorySet:
    decls = [d for g in system.datatypes for d in g]
    adt_names = {d.name for d in decls}
    sorts: list[Sort] = []
    for p in system.predicates:
        sorts.extend(p.arg_sorts)
    for c in system.clauses:
        sorts.extend(s for _, s in c.variables)
    for d in decls:
        sorts.extend(d.field_sorts())
    terms = list(_clause_terms(system))
    for t in terms:
        sorts.extend(_term_sorts(t))

    names: set[str] = set()
    indexed = False
    for s in sorts:
        for sub in s.walk():
            if isinstance(sub.name, str):
                names.add(sub.name)
            else:
                indexed = True

    uses_arrays = "Array" in names
    uses_reals = "Real" in names
    uses_ints = "Int" in names
    uses_bool = "Bool" in names
    verdict = LiaVerdict.NO_ARITH
    extra: set[str] = set()
    for t in terms:
        for s in subterms(t):
            if isinstance(s, App) and isinstance(s.fn, str):
                if s.fn in ("select", "store"):
                    uses_arrays = True
                elif s.fn in ("/", "to_real", "to_int", "is_int"):
                    uses_reals = True
                elif s.fn in _LIA_OPS:
                    uses_ints = True
            elif isinstance(s, App) and _is_const_array(s.fn):
                uses_arrays = True
            elif isinstance(s, App) and not _is_tester(s.fn):
                extra.add(f"indexed function {s.fn}")
            elif isinstance(s, Lit) and s.kind == "decimal":
                uses_reals = True
            elif isinstance(s, Lit):
                extra.add(f"{s.kind} literal")
            elif isinstance(s, Num):
                uses_ints = True
            elif isinstance(s, Sym) and s.name in ("true", "false"):
                uses_bool = True
        verdict = max(verdict, arith_linearity_verdict(t))
    if indexed:
        extra.add("indexed sort")
    other = frozenset(names - _BUILTIN_SORTS - adt_names) | frozenset(extra)
    return TheorySet(
        uses_bool=uses_bool,
        uses_ints=uses_ints,
        uses_arrays=uses_arrays,
        uses_adts=bool(decls),
        adt_recursive=adt_recursive(decls) if decls else False,
        lia_verdict=verdict,
        uses_reals=uses_reals,
        other_theories=other,
    )


def _is_const_array(fn) -> bool:
    return (not isinstance(fn, str) and len(fn) == 3 and is_symbol(fn[0], "as")
            and is_symbol(fn[1], "const"))


def _is_tester(fn) -> bool:
    return not isinstance(fn, str) and len(fn) == 3 and is_symbol(fn[0], "_") and is_symbol(fn[1], "is")


def assign_track(system: ChcSystem, theories: Optional[TheorySet] = None) -> TrackAssignment:
    th = theories if theories is not None else detect_theories(system)
    if th.lia_verdict is LiaVerdict.EXCLUDED_NONLINEAR_ARITH:
        return TrackAssignment.uncategorized("nonlinear arithmetic")
    if th.uses_reals:
        return TrackAssignment.uncategorized("real arithmetic")
    if th.other_theories:
        return TrackAssignment.uncategorized("unsupported theory: " + ", ".join(sorted(th.other_theories)))
    linear = system_linearity(system) is Linearity.LINEAR
    if th.uses_adts and th.adt_recursive:
        if th.uses_arrays:
            return TrackAssignment.uncategorized("recursive ADTs combined with arrays")
        return TrackAssignment(Track.ADT_LIA_NONLIN)
    if th.uses_adts:
        return TrackAssignment(Track.LIA_NONLIN_ARRAYS_NONREC_ADT)
    if th.uses_arrays:
        return TrackAssignment(Track.LIA_LIN_ARRAYS if linear else Track.LIA_NONLIN_ARRAYS)
    return TrackAssignment(Track.LIA_LIN if linear else Track.LIA_NONLIN)


def categorize_file(path) -> TrackAssignment:
    try:
        system = to_chc_system(parse_file(path))
    except (LexError, ParseError) as exc:
        return TrackAssignment.uncategorized(f"syntax error: {exc}")
    except ChcError as exc:
        return TrackAssignment.uncategorized(f"{type(exc).__name__}: {exc}")
    return assign_track(system)


def categorization_report(paths: Iterable) -> list[tuple[str, TrackAssignment]]:
    return [(str(p), categorize_file(Path(p))) for p in paths]


def format_report(rows: Iterable[tuple[str, TrackAssignment]]) -> str:
    return "".join(f"{path}\t{a.label}\n" for path, a in rows)
