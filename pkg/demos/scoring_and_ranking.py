# %% [markdown]
# # Scoring and ranking
#
# A solver's score is the number of sat plus unsat answers. Ties are broken by
# total CPU time. Hors-concours solvers are listed but receive no place.

# %%
from chccomp.runner import JobRecord, Result, Status
from chccomp.scoring import find_inconsistencies, rank, ranking_table, score, winners


def job(bench, solver, result, cpu):
    status = Status.COMPLETE if result != "unknown" else Status.TIMEOUT
    return JobRecord(bench, solver, "default", Result(result), status, cpu, cpu)


records = [
    job("b1", "Reference", "sat", 1.0), job("b1", "Fast", "sat", 0.5), job("b1", "Slow", "unknown", 30.0),
    job("b2", "Reference", "unsat", 2.0), job("b2", "Fast", "unknown", 30.0), job("b2", "Slow", "unsat", 9.0),
    job("b3", "Reference", "sat", 1.5), job("b3", "Fast", "unsat", 0.7), job("b3", "Slow", "unknown", 30.0),
    job("b4", "Reference", "unknown", 30.0), job("b4", "Fast", "unknown", 30.0), job("b4", "Slow", "sat", 12.0),
]

# %% [markdown]
# `Reference` scores highest but runs hors concours, so the places go to the others.
# `Fast` and `Slow` both score 2; `Fast` used less CPU time and comes first.

# %%
ranking = rank(score(records, hors_concours={"Reference"}))
print(ranking_table(ranking))
print("winners:", winners(ranking))

# %% [markdown]
# The unique column counts benchmarks that nobody else solved: only `Slow` has one (b4).
# Disagreements between solvers are reported separately, not resolved.

# %%
for issue in find_inconsistencies(records):
    print(issue.to_json())
