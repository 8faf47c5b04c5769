# %% [markdown]
# # Selection arithmetic
#
# Each repository contributes at most `cap` benchmarks to a track. Benchmarks are
# first rated against two reference solvers:
#
# * **A**: both solve it
# * **Bw** / **Br**: only the winner / only the runner-up solves it
# * **C**: neither does
#
# Quotas are floors of fixed fractions of the cap. Whatever a bucket cannot
# supply moves *down* (A to B, B to C), never up.

# %%
from fractions import Fraction

from chccomp.selection import (
    Rating,
    RepoPool,
    SelectionPolicy,
    quota,
    select_two_solver,
    single_solver_counts,
    two_solver_counts,
)

policy = SelectionPolicy()
print("fractions:", policy.f_a, policy.f_bw, policy.f_br, policy.f_c)

# %% [markdown]
# A repository with plenty of everything simply takes its quotas.

# %%
cap = 50
print([quota(f, cap) for f in (policy.f_a, policy.f_bw, policy.f_br, policy.f_c)])
print(two_solver_counts(cap, {Rating.A: 100, Rating.BW: 100, Rating.BR: 100, Rating.C: 100}, policy))

# %% [markdown]
# A repository with very few easy benchmarks: the A shortfall is split across the
# two B sides, and what the B sides cannot use falls through to C.

# %%
sizes = {Rating.A: 3, Rating.BW: 4, Rating.BR: 30, Rating.C: 200}
counts = two_solver_counts(cap, sizes, policy)
print(counts, "total", counts.total)

# %% [markdown]
# Single-solver tracks use two buckets, solved and unsolved by the reference
# solver, with fractions 1/5 and 4/5.

# %%
print(single_solver_counts(312, {Rating.SOLVED_B: 40, Rating.UNSOLVED_C: 87}, policy))

# %% [markdown]
# The fractions are exact rationals, so `0.2 * cap` never rounds the wrong way.
# Picks inside a bucket are seeded: the same seed gives the same benchmarks.

# %%
pool = RepoPool("demo", "LIA-lin", {r: [f"{r.value}-{i}.smt2" for i in range(n)] for r, n in sizes.items()})
first = select_two_solver(pool, policy, cap=cap)
again = select_two_solver(pool, policy, cap=cap)
other = select_two_solver(pool, SelectionPolicy(seed=1), cap=cap)
print(first == again, len(first) == len(other), first == other)
print(Fraction("0.2") * 38, quota(Fraction("0.2"), 38))
