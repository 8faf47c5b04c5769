"""Benchmark rating and quota-based selection of per-repository competition subsets."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .runner import JobRecord


class MismatchedBenchmark(ValueError):
    pass


class Rating(str, enum.Enum):
    A = "A"
    BW = "Bw"
    BR = "Br"
    C = "C"
    SOLVED_B = "SolvedB"
    UNSOLVED_C = "UnsolvedC"


TWO_SOLVER_RATINGS = (Rating.A, Rating.BW, Rating.BR, Rating.C)
SINGLE_SOLVER_RATINGS = (Rating.SOLVED_B, Rating.UNSOLVED_C)

# short manifest spellings; B and C are unambiguous only in single-solver tracks
_SINGLE_ALIASES = {"B": Rating.SOLVED_B, "C": Rating.UNSOLVED_C}


def rate_benchmark(winner: JobRecord, runnerup: JobRecord) -> Rating:
    if winner.benchmark != runnerup.benchmark:
        raise MismatchedBenchmark(f"{winner.benchmark} vs {runnerup.benchmark}")
    w, r = winner.result.solved, runnerup.result.solved
    if w and r:
        return Rating.A
    if w:
        return Rating.BW
    if r:
        return Rating.BR
    return Rating.C


def rate_single(reference: JobRecord) -> Rating:
    return Rating.SOLVED_B if reference.result.solved else Rating.UNSOLVED_C


def _fraction(x) -> Fraction:
    # via str so that 0.2 means 1/5, not the nearest double
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass
class SelectionPolicy:
    caps: dict[tuple[str, str], int] = field(default_factory=dict)
    f_a: Fraction = Fraction(1, 5)
    f_bw: Fraction = Fraction(1, 5)
    f_br: Fraction = Fraction(1, 5)
    f_c: Fraction = Fraction(2, 5)
    f_solved: Fraction = Fraction(1, 5)
    f_unsolved: Fraction = Fraction(4, 5)
    seed: int = 0
    rating_timeout: float = 30.0
    take_all: frozenset[str] = frozenset({"LIA-lin-Arrays"})
    single_solver: frozenset[str] = frozenset({"ADT-LIA-nonlin", "LIA-nonlin-Arrays-nonrecADT"})

    def __post_init__(self):
        for name in ("f_a", "f_bw", "f_br", "f_c", "f_solved", "f_unsolved"):
            value = _fraction(getattr(self, name))
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
            setattr(self, name, value)
        if self.f_a + self.f_bw + self.f_br + self.f_c > 1:
            raise ValueError("two-solver fractions sum to more than 1")
        if self.f_solved + self.f_unsolved > 1:
            raise ValueError("single-solver fractions sum to more than 1")
        for key, cap in self.caps.items():
            if int(cap) != cap or cap <= 0:
                raise ValueError(f"cap for {key} must be a positive integer")
        self.take_all = frozenset(self.take_all)
        self.single_solver = frozenset(self.single_solver)

    def cap(self, track: str, repository: str) -> Optional[int]:
        return self.caps.get((track, repository))


def quota(fraction: Fraction, cap: int) -> int:
    return (fraction * cap).numerator // (fraction * cap).denominator


@dataclass
class RepoPool:
    repository: str
    track: str
    buckets: dict[Rating, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        seen: set[str] = set()
        for rating, members in self.buckets.items():
            overlap = seen.intersection(members)
            if overlap:
                raise ValueError(f"{self.repository}/{self.track}: {sorted(overlap)[0]} "
                                 f"is in more than one bucket")
            seen.update(members)

    def bucket(self, rating: Rating) -> list[str]:
        return self.buckets.get(rating, [])

    def members(self) -> list[str]:
        return sorted({m for b in self.buckets.values() for m in b})


@dataclass(frozen=True)
class TwoSolverCounts:
    a: int
    bw: int
    br: int
    c: int

    @property
    def total(self) -> int:
        return self.a + self.bw + self.br + self.c


def two_solver_counts(cap: int, sizes: Mapping[Rating, int], policy: SelectionPolicy) -> TwoSolverCounts:
    """How many members each bucket contributes; shortfalls only move downward.

    The A shortfall is split between the two B sides (odd one to the winner side).
    Whatever either B side cannot use cascades to C, never across to the other side.
    """
    take_a = min(sizes.get(Rating.A, 0), quota(policy.f_a, cap))
    short_a = quota(policy.f_a, cap) - take_a
    want_bw = quota(policy.f_bw, cap) + (short_a + 1) // 2
    want_br = quota(policy.f_br, cap) + short_a // 2
    take_bw = min(sizes.get(Rating.BW, 0), want_bw)
    take_br = min(sizes.get(Rating.BR, 0), want_br)
    short_b = (want_bw - take_bw) + (want_br - take_br)
    take_c = min(sizes.get(Rating.C, 0), quota(policy.f_c, cap) + short_b)
    return TwoSolverCounts(take_a, take_bw, take_br, take_c)


def single_solver_counts(cap: int, sizes: Mapping[Rating, int],
                         policy: SelectionPolicy) -> tuple[int, int]:
    want_b = quota(policy.f_solved, cap)
    take_b = min(sizes.get(Rating.SOLVED_B, 0), want_b)
    take_c = min(sizes.get(Rating.UNSOLVED_C, 0), quota(policy.f_unsolved, cap) + want_b - take_b)
    return take_b, take_c


def _sample(pool: RepoPool, rating: Rating, k: int, seed: int) -> list[str]:
    # one generator per bucket, so counts in one bucket never shift picks in another
    rng = random.Random(f"{seed}:{pool.track}:{pool.repository}:{rating.value}")
    return rng.sample(sorted(pool.bucket(rating)), k)


def _sizes(pool: RepoPool) -> dict[Rating, int]:
    return {r: len(pool.bucket(r)) for r in Rating}


def select_two_solver(pool: RepoPool, policy: SelectionPolicy, cap: Optional[int] = None) -> list[str]:
    cap = cap if cap is not None else policy.cap(pool.track, pool.repository)
    if cap is None:
        raise KeyError(f"no cap configured for {pool.track}/{pool.repository}")
    counts = two_solver_counts(cap, _sizes(pool), policy)
    takes = zip(TWO_SOLVER_RATINGS, (counts.a, counts.bw, counts.br, counts.c))
    return [m for rating, k in takes for m in _sample(pool, rating, k, policy.seed)]


def select_single_solver(pool: RepoPool, policy: SelectionPolicy, cap: Optional[int] = None) -> list[str]:
    cap = cap if cap is not None else policy.cap(pool.track, pool.repository)
    if cap is None:
        raise KeyError(f"no cap configured for {pool.track}/{pool.repository}")
    take_b, take_c = single_solver_counts(cap, _sizes(pool), policy)
    return (_sample(pool, Rating.SOLVED_B, take_b, policy.seed)
            + _sample(pool, Rating.UNSOLVED_C, take_c, policy.seed))


def select_take_all(pool: RepoPool) -> list[str]:
    return pool.members()


def select_pool(pool: RepoPool, policy: SelectionPolicy) -> list[str]:
    if pool.track in policy.take_all:
        return select_take_all(pool)
    if pool.track in policy.single_solver:
        return select_single_solver(pool, policy)
    return select_two_solver(pool, policy)


# --- manifests --------------------------------------------------------------------


def parse_bucket_manifest(text: str, policy: Optional[SelectionPolicy] = None) -> list[RepoPool]:
    """Read ``track<TAB>repository<TAB>rating<TAB>path`` lines into pools.

    Blank lines and ``#`` comments are skipped.
    """
    single = policy.single_solver if policy else SelectionPolicy().single_solver
    pools: dict[tuple[str, str], dict[Rating, list[str]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 tab-separated fields")
        track, repo, label, path = parts
        if track in single and label in _SINGLE_ALIASES:
            rating = _SINGLE_ALIASES[label]
        else:
            try:
                rating = Rating(label)
            except ValueError:
                raise ValueError(f"line {lineno}: unknown rating {label!r}") from None
        expected = SINGLE_SOLVER_RATINGS if track in single else TWO_SOLVER_RATINGS
        if rating not in expected:
            raise ValueError(f"line {lineno}: rating {label} does not fit track {track}")
        pools.setdefault((track, repo), {}).setdefault(rating, []).append(path)
    return [RepoPool(repo, track, buckets) for (track, repo), buckets in sorted(pools.items())]


def select_all(pools: Iterable[RepoPool], policy: SelectionPolicy) -> list[tuple[str, str, str]]:
    rows = []
    for pool in sorted(pools, key=lambda p: (p.track, p.repository)):
        rows.extend((pool.track, pool.repository, path) for path in select_pool(pool, policy))
    return rows


def format_selection(rows: Sequence[tuple[str, str, str]]) -> str:
    return "".join(f"{t}\t{r}\t{p}\n" for t, r, p in rows)
