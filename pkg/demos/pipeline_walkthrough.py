# %% [markdown]
# # From raw files to a ranking
#
# This walkthrough runs the whole pipeline on a few fixture benchmarks. Two tiny
# scripted "solvers" stand in for real ones.

# %%
import json
import sys
import tempfile
from pathlib import Path

from chccomp.categorize import categorize_file
from chccomp.normalize import Formatter
from chccomp.runner import ResourceLimits, SolverConfig, job_csv_text, run_campaign
from chccomp.scoring import rank, ranking_table, score

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "tests" / "fixtures" / "corpus"
STUB = ROOT / "tests" / "stubs" / "stub_solver.py"
work = Path(tempfile.mkdtemp(prefix="chccomp-demo-"))

# %% [markdown]
# ## Format
# Inputs with several queries are merged to one, datatypes are grouped, and
# exact duplicates (up to renaming and whitespace) are dropped.

# %%
names = ["lin_counter.smt2", "lin_multi_query.smt2", "nonlin_fib.smt2", "adt_list.smt2", "excl_parametric_adt.smt2"]
fmt = Formatter(work / "formatted")
for report in (fmt.run(CORPUS / n) for n in names):
    print(Path(report.input).name, report.transformations, report.rejection and report.rejection["code"])

# %% [markdown]
# ## Categorize

# %%
benches = sorted((work / "formatted").glob("*.smt2"))
for b in benches:
    print(b.name, categorize_file(b).label)

# %% [markdown]
# ## Run
# Each stub answers from a JSON table keyed by file name.

# %%
def stub(name, table):
    path = work / f"{name}.json"
    path.write_text(json.dumps(table))
    return SolverConfig(name, "default", (sys.executable, str(STUB), str(path), "{benchmark}"))


solvers = [
    stub("eager", {"*": "sat", "adt_list.smt2": "unknown"}),
    stub("careful", {"lin_counter.smt2": "sat", "adt_list.smt2": "unsat", "*": "unknown"}),
]
campaign = run_campaign(solvers, [str(b) for b in benches], ResourceLimits(5, 5, 1 << 30), parallelism=2)
print(job_csv_text(campaign.records))

# %% [markdown]
# ## Score

# %%
print(ranking_table(rank(score(campaign.records))))
