"""Horn-clause view of a parsed benchmark script.

Every ``assert`` becomes one :class:`Clause`: a quantifier prefix, a body made
of uninterpreted atoms plus a theory constraint, and a head that is either an
uninterpreted atom or ``False`` (a query).
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Optional

from .smtlib import (
    BOOL,
    FALSE,
    TRUE,
    App,
    Assert,
    CheckSat,
    DatatypeDecl,
    DeclareDatatypes,
    DeclareFun,
    Quant,
    Script,
    SList,
    Sort,
    Sym,
    Term,
    Unsupported,
    expand_lets,
    free_symbols,
    print_script,
    subterms,
)
from .smtlib.terms import substitute


class ChcError(ValueError):
    """The script does not describe a system of constrained Horn clauses."""


class NotHorn(ChcError):
    pass


class UnboundVariable(ChcError):
    pass


class UndeclaredPredicate(ChcError):
    pass


class ArityMismatch(ChcError):
    pass


class MultipleCheckSat(ChcError):
    pass


class UnsupportedCommand(ChcError):
    pass


CORE_SYMBOLS = frozenset({"not", "and", "or", "=>", "xor", "=", "distinct", "ite"})
INT_SYMBOLS = frozenset({"+", "-", "*", "div", "mod", "abs", "<=", "<", ">=", ">"})
REAL_SYMBOLS = frozenset({"/", "to_real", "to_int", "is_int"})
ARRAY_SYMBOLS = frozenset({"select", "store"})
THEORY_SYMBOLS = CORE_SYMBOLS | INT_SYMBOLS | REAL_SYMBOLS | ARRAY_SYMBOLS


@dataclass(frozen=True)
class Predicate:
    name: str
    arg_sorts: tuple[Sort, ...]

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class PredApp:
    """An uninterpreted atom ``P(t1, ..., tn)``."""

    pred: str
    args: tuple[Term, ...] = ()

    def to_term(self) -> Term:
        return App(self.pred, self.args) if self.args else Sym(self.pred)


@dataclass(frozen=True)
class Clause:
    variables: tuple[tuple[str, Sort], ...]
    body: tuple[PredApp, ...]
    constraint: Term
    head: Optional[PredApp]

    @property
    def is_query(self) -> bool:
        return self.head is None


class Linearity(enum.Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class ChcSystem:
    predicates: tuple[Predicate, ...]
    datatypes: tuple[tuple[DatatypeDecl, ...], ...]
    clauses: tuple[Clause, ...]
    fingerprint: str = field(default="", compare=False)

    @property
    def queries(self) -> list[Clause]:
        return [c for c in self.clauses if c.is_query]

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)


def clause_linearity(clause: Clause) -> Linearity:
    return Linearity.LINEAR if len(clause.body) <= 1 else Linearity.NONLINEAR


def system_linearity(system: ChcSystem) -> Linearity:
    if any(clause_linearity(c) is Linearity.NONLINEAR for c in system.clauses):
        return Linearity.NONLINEAR
    return Linearity.LINEAR


# --- conversion --------------------------------------------------------------


class _Signature:
    def __init__(self, preds: dict[str, Predicate], datatypes: list[DatatypeDecl]):
        self.preds = preds
        self.constructors: dict[str, int] = {}
        self.selectors: set[str] = set()
        self.testers: set[str] = set()
        for d in datatypes:
            for c in d.constructors:
                self.constructors[c.name] = len(c.selectors)
                self.testers.add(f"is-{c.name}")
                self.selectors.update(s for s, _ in c.selectors)

    def is_pred(self, t: Term, bound: frozenset[str]) -> bool:
        if isinstance(t, App):
            return isinstance(t.fn, str) and t.fn in self.preds
        return (isinstance(t, Sym) and isinstance(t.name, str)
                and t.name in self.preds and t.name not in bound)

    def mentions_pred(self, t: Term) -> bool:
        for s in subterms(t):
            if isinstance(s, App) and isinstance(s.fn, str) and s.fn in self.preds:
                return True
            if isinstance(s, Sym) and isinstance(s.name, str) and s.name in self.preds:
                return True
        return False

    def known_function(self, fn) -> bool:
        if isinstance(fn, SList):
            return True
        return (fn in THEORY_SYMBOLS or fn in self.constructors or fn in self.selectors
                or fn in self.testers)


def _and_terms(parts: list[Term]) -> Term:
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return App("and", tuple(parts))


class _Decomposer:
    """Split a clause formula into premise items and conclusion items."""

    def __init__(self, sig: _Signature, variables: list[tuple[str, Sort]]):
        self.sig = sig
        self.variables = variables
        self.premise: list[Term] = []
        self.conclusion: list[Term] = []

    def bound(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.variables)

    def positive(self, t: Term) -> None:
        if isinstance(t, App) and t.fn == "=>":
            for a in t.args[:-1]:
                self.negative(a)
            self.positive(t.args[-1])
        elif isinstance(t, App) and t.fn == "or":
            for a in t.args:
                self.positive(a)
        elif isinstance(t, App) and t.fn == "not" and len(t.args) == 1:
            self.negative(t.args[0])
        elif t == FALSE:
            pass
        else:
            self.conclusion.append(t)

    def negative(self, t: Term) -> None:
        if isinstance(t, App) and t.fn == "and":
            for a in t.args:
                self.negative(a)
        elif (isinstance(t, App) and t.fn == "not" and len(t.args) == 1
              and self.sig.mentions_pred(t.args[0])):
            self.positive(t.args[0])
        elif isinstance(t, Quant) and t.kind == "exists":
            self.negative(self.lift(t))
        elif t == TRUE:
            pass
        else:
            self.premise.append(t)

    def lift(self, q: Quant) -> Term:
        """Move an existential in the premise into the universal prefix."""
        taken = {n for n, _ in self.variables}
        mapping = {}
        for n, s in q.vars:
            new = n
            i = 0
            while new in taken:
                i += 1
                new = f"{n}!{i}"
            taken.add(new)
            self.variables.append((new, s))
            if new != n:
                mapping[n] = Sym(new)
        return substitute(q.body, mapping)


def _strip_prefix(t: Term) -> tuple[list[tuple[str, Sort]], Term, bool]:
    """Return (variables, matrix, negated) for forall-prefixed or ``(not (exists ...))`` forms."""
    variables: list[tuple[str, Sort]] = []
    negated = False
    while True:
        if isinstance(t, Quant) and t.kind == "forall":
            variables.extend(t.vars)
            t = t.body
        elif (not negated and isinstance(t, App) and t.fn == "not" and len(t.args) == 1
              and isinstance(t.args[0], Quant) and t.args[0].kind == "exists"):
            negated = True
            variables.extend(t.args[0].vars)
            t = t.args[0].body
        else:
            return variables, t, negated


def _atom(t: Term, sig: _Signature) -> PredApp:
    if isinstance(t, Sym):
        pred, args = t.name, ()
    else:
        pred, args = t.fn, t.args
    expected = sig.preds[pred].arity
    if len(args) != expected:
        raise ArityMismatch(f"{pred} expects {expected} argument(s), got {len(args)}")
    for a in args:
        if sig.mentions_pred(a):
            raise NotHorn(f"uninterpreted predicate nested inside an argument of {pred}")
    return PredApp(pred, tuple(args))


def _check_symbols(t: Term, sig: _Signature, bound: frozenset[str]) -> None:
    for name in free_symbols(t, bound):
        if name in ("true", "false") or name in sig.preds or sig.constructors.get(name) == 0:
            continue
        raise UnboundVariable(f"unbound symbol {name}")
    for s in subterms(t):
        if isinstance(s, App) and not sig.known_function(s.fn) and s.fn not in sig.preds:
            raise UndeclaredPredicate(f"undeclared function or predicate {s.fn}")
        if isinstance(s, App) and s.fn in sig.preds and sig.preds[s.fn].arity != len(s.args):
            raise ArityMismatch(
                f"{s.fn} expects {sig.preds[s.fn].arity} argument(s), got {len(s.args)}")


def clause_from_term(term: Term, sig: _Signature) -> Clause:
    variables, matrix, negated = _strip_prefix(expand_lets(term))
    d = _Decomposer(sig, list(variables))
    if negated:
        d.negative(matrix)
    else:
        d.positive(matrix)
    bound = d.bound()
    atoms, constraint = [], []
    for item in d.premise:
        if sig.is_pred(item, bound):
            atoms.append(_atom(item, sig))
        elif sig.mentions_pred(item):
            raise NotHorn("uninterpreted predicate occurs inside the constraint")
        else:
            constraint.append(item)
    if len(d.conclusion) > 1:
        raise NotHorn("clause head is a disjunction")
    head = None
    if d.conclusion:
        h = d.conclusion[0]
        if not sig.is_pred(h, bound):
            raise NotHorn("clause head is neither false nor an uninterpreted atom")
        head = _atom(h, sig)
    clause = Clause(tuple(d.variables), tuple(atoms), _and_terms(constraint), head)
    for t in [clause.constraint] + [a.to_term() for a in clause.body] + (
            [head.to_term()] if head else []):
        _check_symbols(t, sig, bound)
    return clause


def signature(script: Script) -> _Signature:
    preds: dict[str, Predicate] = {}
    for c in script.commands:
        if isinstance(c, DeclareFun):
            if c.result != BOOL:
                raise NotHorn(f"uninterpreted function {c.name} with result sort {c.result}")
            if c.name in preds:
                raise ChcError(f"predicate {c.name} declared twice")
            preds[c.name] = Predicate(c.name, c.args)
    return _Signature(preds, script.datatypes)


def to_chc_system(script: Script) -> ChcSystem:
    for c in script.commands:
        if isinstance(c, Unsupported):
            raise UnsupportedCommand(f"unsupported command {c.raw}")
    if len(script.of_type(CheckSat)) > 1:
        raise MultipleCheckSat("more than one check-sat command")
    sig = signature(script)
    clauses = tuple(clause_from_term(a.term, sig) for a in script.of_type(Assert))
    groups = tuple(c.decls for c in script.of_type(DeclareDatatypes))
    digest = hashlib.sha256(print_script(script).encode()).hexdigest()
    return ChcSystem(tuple(sig.preds.values()), groups, clauses, digest)


# --- back to terms -------------------------------------------------------------


def clause_to_term(clause: Clause) -> Term:
    """Render a clause as ``(forall (vars) (=> body head))``."""
    parts: list[Term] = [a.to_term() for a in clause.body]
    c = clause.constraint
    if isinstance(c, App) and c.fn == "and":
        parts.extend(c.args)
    elif c != TRUE:
        parts.append(c)
    head = clause.head.to_term() if clause.head else FALSE
    matrix: Term = head if not parts else App("=>", (_and_terms(parts), head))
    if clause.variables:
        return Quant("forall", clause.variables, matrix)
    return matrix

