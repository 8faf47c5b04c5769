"""Bring benchmarks into competition format, and fingerprint them for deduplication."""

from __future__ import annotations

import hashlib
import json
import shutil
import threading
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .categorize import adt_dependencies
from .chc import (
    ChcError,
    ChcSystem,
    Clause,
    MultipleCheckSat,
    Predicate,
    PredApp,
    UnsupportedCommand,
    clause_to_term,
    to_chc_system,
)
from .smtlib import (
    BOOL,
    FALSE,
    TRUE,
    Annot,
    App,
    Assert,
    CheckSat,
    DatatypeDecl,
    DeclareDatatypes,
    DeclareFun,
    Exit,
    GetModel,
    LexError,
    Let,
    ParametricDatatypeError,
    ParseError,
    Quant,
    Script,
    SetInfo,
    SetLogic,
    Sym,
    Term,
    Unsupported,
    command_to_sexpr,
    parse_script,
    print_script,
)
from .smtlib.sexpr import flat

QUERY_PREFIX = "CHC_COMP_QUERY_"

# vocabulary of NormalizationReport.transformations
SET_LOGIC = "set_logic"
REORDER_COMMANDS = "reorder_commands"
GROUP_DATATYPES = "group_datatypes"
MERGE_QUERIES = "merge_queries"
ADD_CHECK_SAT = "add_check_sat"
TRANSFORMATIONS = (SET_LOGIC, REORDER_COMMANDS, GROUP_DATATYPES, MERGE_QUERIES, ADD_CHECK_SAT)


class Rejected(Exception):
    code = "rejected"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class RejectSyntax(Rejected):
    code = "syntax"


class RejectParametricDatatype(Rejected):
    code = "parametric-datatype"


class RejectUnsupportedCommand(Rejected):
    code = "unsupported-command"


class RejectNotHorn(Rejected):
    code = "not-horn"


class RejectMalformed(Rejected):
    """Well-formed Horn clauses, but not a single competition problem (query or check-sat count)."""

    code = "malformed"


@dataclass
class NormalizationReport:
    input: str
    transformations: list[str] = field(default_factory=list)
    output: Optional[str] = None
    rejection: Optional[dict] = None
    fingerprint: Optional[str] = None
    duplicate_of: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# --- merge_queries ---------------------------------------------------------------


def _taken_names(system: ChcSystem) -> set[str]:
    names = {p.name for p in system.predicates}
    for group in system.datatypes:
        for d in group:
            names.add(d.name)
            for c in d.constructors:
                names.add(c.name)
                names.update(s for s, _ in c.selectors)
    for c in system.clauses:
        names.update(n for n, _ in c.variables)
    return names


def fresh_query_name(system: ChcSystem) -> str:
    taken = _taken_names(system)
    i = 0
    while f"{QUERY_PREFIX}{i}" in taken:
        i += 1
    return f"{QUERY_PREFIX}{i}"


def merge_queries(system: ChcSystem) -> ChcSystem:
    """Route every query through one fresh nullary predicate, leaving a single query."""
    if len(system.queries) <= 1:
        return system
    goal = fresh_query_name(system)
    atom = PredApp(goal)
    clauses = tuple(
        Clause(c.variables, c.body, c.constraint, atom) if c.is_query else c
        for c in system.clauses)
    final = Clause((), (atom,), TRUE, None)
    return ChcSystem(
        system.predicates + (Predicate(goal, ()),),
        system.datatypes,
        clauses + (final,),
        system.fingerprint,
    )


# --- datatype grouping -------------------------------------------------------------


def group_datatypes(decls: Sequence[DatatypeDecl]) -> list[tuple[DatatypeDecl, ...]]:
    """Connected components of the (undirected) field-sort dependency graph.

    Components are ordered by their earliest declaration; members keep declaration order.
    """
    graph = adt_dependencies(decls)
    neighbours: dict[str, set[str]] = {d.name: set() for d in decls}
    for a, targets in graph.items():
        for b in targets:
            neighbours[a].add(b)
            neighbours[b].add(a)
    order = {d.name: i for i, d in enumerate(decls)}
    seen: set[str] = set()
    groups = []
    for d in decls:
        if d.name in seen:
            continue
        component = {d.name}
        queue = deque([d.name])
        while queue:
            for n in neighbours[queue.popleft()]:
                if n not in component:
                    component.add(n)
                    queue.append(n)
        seen |= component
        groups.append(tuple(x for x in decls if x.name in component))
    groups.sort(key=lambda g: order[g[0].name])
    return groups


# --- normalize -----------------------------------------------------------------------

_RANK = {SetLogic: 0, SetInfo: 1, DeclareDatatypes: 2, DeclareFun: 3, Assert: 4, CheckSat: 5,
         GetModel: 6, Exit: 7}


def _system_or_reject(script: Script) -> ChcSystem:
    try:
        return to_chc_system(script)
    except UnsupportedCommand as exc:
        raise RejectUnsupportedCommand(str(exc)) from exc
    except MultipleCheckSat as exc:
        raise RejectMalformed(str(exc)) from exc
    except ChcError as exc:
        raise RejectNotHorn(f"{type(exc).__name__}: {exc}") from exc


def normalize(script: Script, merge: bool = True) -> tuple[Script, NormalizationReport]:
    """Return the competition-format script and the list of applied transformations.

    Raises a :class:`Rejected` subclass instead of producing an altered benchmark
    when the input cannot be brought into format.
    """
    for c in script.commands:
        if isinstance(c, Unsupported):
            raise RejectUnsupportedCommand(f"unsupported command {flat(c.raw)}")
    system = _system_or_reject(script)
    applied: list[str] = []
    commands = script.commands

    logic = SetLogic("HORN")
    if not commands or commands[0] != logic:
        applied.append(SET_LOGIC)
    ranks = [_RANK[type(c)] for c in commands if not isinstance(c, SetLogic)]
    if ranks != sorted(ranks):
        applied.append(REORDER_COMMANDS)

    given_groups = [c.decls for c in commands if isinstance(c, DeclareDatatypes)]
    groups = group_datatypes(script.datatypes)
    if given_groups != groups:
        applied.append(GROUP_DATATYPES)

    funs = [c for c in commands if isinstance(c, DeclareFun)]
    asserts = [c for c in commands if isinstance(c, Assert)]
    n_queries = len(system.queries)
    if n_queries > 1 and merge:
        merged = merge_queries(system)
        goal = merged.predicates[-1].name
        funs.append(DeclareFun(goal, (), BOOL))
        asserts = [Assert(clause_to_term(merged.clauses[i])) if c.is_query else a
                   for i, (a, c) in enumerate(zip(asserts, system.clauses))]
        asserts.append(Assert(clause_to_term(merged.clauses[-1])))
        applied.append(MERGE_QUERIES)
    elif n_queries != 1:
        raise RejectMalformed(f"expected exactly one query clause, found {n_queries}")

    if not any(isinstance(c, CheckSat) for c in commands):
        applied.append(ADD_CHECK_SAT)

    out = [logic]
    out += [c for c in commands if isinstance(c, SetInfo)]
    out += [DeclareDatatypes(g) for g in groups]
    out += funs
    out += asserts
    out.append(CheckSat())
    out += [c for c in commands if isinstance(c, (GetModel, Exit))]
    return Script(tuple(out)), NormalizationReport("", applied)


# --- fingerprint ---------------------------------------------------------------------


def alpha_rename(term: Term) -> Term:
    """Rename bound variables to v0, v1, ... in binding order."""
    counter = [0]

    def fresh() -> str:
        name = f"v{counter[0]}"
        counter[0] += 1
        return name

    def go(t: Term, env: dict) -> Term:
        if isinstance(t, Sym):
            return Sym(env[t.name]) if isinstance(t.name, str) and t.name in env else t
        if isinstance(t, App):
            return App(t.fn, tuple(go(a, env) for a in t.args))
        if isinstance(t, Quant):
            inner = dict(env)
            new_vars = []
            for n, s in t.vars:
                inner[n] = fresh()
                new_vars.append((inner[n], s))
            return Quant(t.kind, tuple(new_vars), go(t.body, inner))
        if isinstance(t, Let):
            values = [(n, go(v, env)) for n, v in t.bindings]
            inner = dict(env)
            binds = []
            for n, v in values:
                inner[n] = fresh()
                binds.append((inner[n], v))
            return Let(tuple(binds), go(t.body, inner))
        if isinstance(t, Annot):
            return Annot(go(t.term, env), t.attrs)
        return t

    return go(term, {})


def canonical_text(script: Script) -> str:
    """Declarations sorted by (kind, name), asserts in order with bound variables renamed.

    Metadata (``set-info``, ``get-model``, ``exit``) does not contribute.
    """
    groups = [tuple(sorted(c.decls, key=lambda d: d.name))
              for c in script.commands if isinstance(c, DeclareDatatypes)]
    groups.sort(key=lambda g: g[0].name)
    funs = sorted((c for c in script.commands if isinstance(c, DeclareFun)), key=lambda c: c.name)
    lines = ["(set-logic HORN)"]
    lines += [flat(command_to_sexpr(DeclareDatatypes(g))) for g in groups]
    lines += [flat(command_to_sexpr(f)) for f in funs]
    lines += [flat(command_to_sexpr(Assert(alpha_rename(c.term))))
              for c in script.commands if isinstance(c, Assert)]
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def fingerprint(script: Script) -> str:
    """SHA-256 of the canonical form of the normalized script."""
    normalized, _ = normalize(script)
    return digest(canonical_text(normalized))


# --- files ---------------------------------------------------------------------------


def parse_or_reject(text: str) -> Script:
    try:
        return parse_script(text)
    except ParametricDatatypeError as exc:
        raise RejectParametricDatatype(str(exc)) from exc
    except (LexError, ParseError) as exc:
        raise RejectSyntax(str(exc)) from exc


class Formatter:
    """Formats files into ``out_dir``; safe to share between worker threads.

    The set of fingerprints seen so far is the only shared state: the first file
    with a given fingerprint is written, later ones are reported as duplicates.
    """

    def __init__(self, out_dir, merge: bool = True, quarantine_dir=None):
        self.out_dir = Path(out_dir)
        self.merge = merge
        self.quarantine_dir = Path(quarantine_dir) if quarantine_dir else None
        self._lock = threading.Lock()
        self._seen: dict[str, str] = {}
        self._names: set[str] = set()

    def claim(self, fp: str, source: str) -> Optional[str]:
        """Register ``fp``; return the earlier source if it was already present."""
        with self._lock:
            if fp in self._seen:
                return self._seen[fp]
            self._seen[fp] = source
            return None

    def _output_path(self, src: Path, fp: str) -> Path:
        with self._lock:
            name = src.name
            if name in self._names:
                name = f"{src.stem}.{fp[:12]}{src.suffix}"
            self._names.add(name)
        return self.out_dir / name

    def run(self, path) -> NormalizationReport:
        src = Path(path)
        report = NormalizationReport(str(src))
        try:
            script = parse_or_reject(src.read_text(encoding="utf-8"))
            normalized, partial = normalize(script, self.merge)
        except Rejected as exc:
            report.rejection = {"code": exc.code, "message": exc.message}
            if self.quarantine_dir is not None:
                self.quarantine_dir.mkdir(parents=True, exist_ok=True)
                shutil.copy2(src, self.quarantine_dir / src.name)
            return report
        report.transformations = partial.transformations
        report.fingerprint = digest(canonical_text(normalized))
        report.duplicate_of = self.claim(report.fingerprint, str(src))
        if report.duplicate_of is None:
            out = self._output_path(src, report.fingerprint)
            self.out_dir.mkdir(parents=True, exist_ok=True)
            out.write_text(print_script(normalized), encoding="utf-8")
            report.output = str(out)
        return report
