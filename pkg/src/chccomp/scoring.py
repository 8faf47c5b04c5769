"""Scores, rankings, unique solves and disagreement reports from job records."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .runner import JobRecord, Result

RANKING_HEADER = ("rank", "solver", "score", "sat", "unsat", "cpu_time", "wallclock_time",
                  "unique", "hors_concours")


class DuplicateRecord(ValueError):
    pass


@dataclass(frozen=True)
class SolverScore:
    solver: str
    sat: int
    unsat: int
    cpu_time: float
    wall_time: float
    unique: int = 0
    hors_concours: bool = False

    @property
    def score(self) -> int:
        return self.sat + self.unsat


@dataclass(frozen=True)
class RankedEntry:
    place: Optional[int]  # None for hors-concours entries
    entry: SolverScore


@dataclass(frozen=True)
class Inconsistency:
    benchmark: str
    sat: tuple[str, ...]
    unsat: tuple[str, ...]

    def to_json(self) -> str:
        return json.dumps({"benchmark": self.benchmark, "sat": list(self.sat),
                           "unsat": list(self.unsat)})


def _check_unique_pairs(records: Sequence[JobRecord]) -> None:
    seen = set()
    for r in records:
        key = (r.solver, r.benchmark)
        if key in seen:
            raise DuplicateRecord(f"two records for solver {r.solver} on {r.benchmark}")
        seen.add(key)


def count_unique(records: Sequence[JobRecord]) -> dict[str, int]:
    """Benchmarks a solver decided while every other solver's result is unknown.

    A solver without a record for a benchmark counts as unknown on it.
    """
    solvers = sorted({r.solver for r in records})
    solved_by: dict[str, set[str]] = defaultdict(set)
    for r in records:
        if r.result.solved:
            solved_by[r.benchmark].add(r.solver)
    counts = dict.fromkeys(solvers, 0)
    for who in solved_by.values():
        if len(who) == 1:
            counts[next(iter(who))] += 1
    return counts


def score(records: Sequence[JobRecord], hors_concours: Iterable[str] = ()) -> list[SolverScore]:
    records = list(records)
    _check_unique_pairs(records)
    hc = set(hors_concours)
    unique = count_unique(records)
    sat: dict[str, int] = defaultdict(int)
    unsat: dict[str, int] = defaultdict(int)
    cpu: dict[str, float] = defaultdict(float)
    wall: dict[str, float] = defaultdict(float)
    for r in records:
        sat[r.solver] += r.result is Result.SAT
        unsat[r.solver] += r.result is Result.UNSAT
        cpu[r.solver] += r.cpu_time
        wall[r.solver] += r.wall_time
    return [SolverScore(s, sat[s], unsat[s], round(cpu[s], 2), round(wall[s], 2), unique[s], s in hc)
            for s in sorted(unique)]


def rank(scores: Iterable[SolverScore]) -> list[RankedEntry]:
    """Descending score, then ascending CPU time, then name; places skip hors-concours entries."""
    ordered = sorted(scores, key=lambda s: (-s.score, s.cpu_time, s.solver))
    out, place = [], 0
    for s in ordered:
        if s.hors_concours:
            out.append(RankedEntry(None, s))
        else:
            place += 1
            out.append(RankedEntry(place, s))
    return out


def winners(ranking: Sequence[RankedEntry], n: int = 3) -> list[str]:
    return [e.entry.solver for e in ranking if e.place is not None][:n]


def find_inconsistencies(records: Sequence[JobRecord]) -> list[Inconsistency]:
    sat: dict[str, set[str]] = defaultdict(set)
    unsat: dict[str, set[str]] = defaultdict(set)
    for r in records:
        if r.result is Result.SAT:
            sat[r.benchmark].add(r.solver)
        elif r.result is Result.UNSAT:
            unsat[r.benchmark].add(r.solver)
    return [Inconsistency(b, tuple(sorted(sat[b])), tuple(sorted(unsat[b])))
            for b in sorted(set(sat) & set(unsat))]


def filter_records(records: Iterable[JobRecord], disqualify: Iterable[str] = (),
                   drop_benchmarks: Iterable[str] = ()) -> list[JobRecord]:
    """Organizer actions: remove whole solvers and/or whole benchmarks before scoring."""
    solvers, benchmarks = set(disqualify), set(drop_benchmarks)
    return [r for r in records if r.solver not in solvers and r.benchmark not in benchmarks]


# --- output ------------------------------------------------------------------------


def _row(e: RankedEntry) -> list[str]:
    s = e.entry
    return ["-" if e.place is None else str(e.place), s.solver, str(s.score), str(s.sat),
            str(s.unsat), f"{s.cpu_time:.2f}", f"{s.wall_time:.2f}", str(s.unique),
            "yes" if s.hors_concours else "no"]


def ranking_csv(ranking: Sequence[RankedEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RANKING_HEADER)
    writer.writerows(_row(e) for e in ranking)
    return buf.getvalue()


def ranking_table(ranking: Sequence[RankedEntry]) -> str:
    rows = [list(RANKING_HEADER)] + [_row(e) for e in ranking]
    widths = [max(len(r[i]) for r in rows) for i in range(len(RANKING_HEADER))]
    lines = []
    for r in rows:
        cells = [c.ljust(w) if i == 1 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def inconsistencies_jsonl(items: Iterable[Inconsistency]) -> str:
    return "".join(i.to_json() + "\n" for i in items)
