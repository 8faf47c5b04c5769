import sys
import time

import pytest

from conftest import live_processes_mentioning, stub_command, write_table
from chccomp.runner import (
    COMPETITION_LIMITS,
    GiB,
    TEST_LIMITS,
    JobRecord,
    LaunchError,
    ResourceLimits,
    Result,
    SolverConfig,
    Status,
    job_csv_text,
    parse_job_csv,
    parse_verdict,
    read_job_csv,
    run_campaign,
    run_job,
)

QUICK = ResourceLimits(10, 3, 4 * GiB)


@pytest.fixture
def bench(tmp_path):
    p = tmp_path / "b.smt2"
    p.write_text("(set-logic HORN)\n")
    return p


def stub(tmp_path, table, name="stub"):
    return SolverConfig(name, "default", stub_command(write_table(tmp_path / f"{name}.json", table)))


def test_presets():
    assert TEST_LIMITS == ResourceLimits(600, 600, 64 * GiB)
    assert COMPETITION_LIMITS == ResourceLimits(1800, 1800, 64 * GiB)


def test_limits_positive():
    with pytest.raises(ValueError):
        ResourceLimits(0, 1, 1)


def test_placeholder_exactly_once():
    with pytest.raises(ValueError):
        SolverConfig("s", "c", ("solver",))
    with pytest.raises(ValueError):
        SolverConfig("s", "c", ("solver", "{benchmark}", "{benchmark}"))
    assert SolverConfig("s", "c", ("solver", "--in={benchmark}")).argv("x") == ["solver", "--in=x"]


def test_record_invariants():
    with pytest.raises(ValueError):
        JobRecord("b", "s", "c", Result.SAT, Status.TIMEOUT, 1, 1)
    with pytest.raises(ValueError):
        JobRecord("b", "s", "c", Result.UNKNOWN, Status.COMPLETE, -1, 1)
    assert JobRecord("b", "s", "c", "sat", "complete", 1.234, 0.005).cpu_time == 1.23


@pytest.mark.parametrize("text,result", [
    ("sat\n", Result.SAT), ("\n\n  unsat  \nextra\n", Result.UNSAT), ("maybe\n", Result.UNKNOWN),
    ("", Result.UNKNOWN), ("sat model\n", Result.UNKNOWN), ("SAT\n", Result.UNKNOWN),
    ("unknown\nsat\n", Result.UNKNOWN),
])
def test_parse_verdict(text, result):
    assert parse_verdict(text) is result


def test_sat(tmp_path, bench):
    r = run_job(stub(tmp_path, {"*": "sat"}), bench, QUICK)
    assert (r.result, r.status) == (Result.SAT, Status.COMPLETE)
    assert r.wall_time < 3


def test_give_up_text(tmp_path, bench):
    r = run_job(stub(tmp_path, {"*": "maybe"}), bench, QUICK)
    assert (r.result, r.status) == (Result.UNKNOWN, Status.COMPLETE)


def test_wall_timeout(tmp_path, bench):
    r = run_job(stub(tmp_path, {"*": {"sleep": 30, "then": "sat"}}), bench, ResourceLimits(10, 1, 4 * GiB))
    assert (r.result, r.status) == (Result.UNKNOWN, Status.TIMEOUT)
    assert r.wall_time >= 1


def test_cpu_timeout(tmp_path, bench):
    r = run_job(stub(tmp_path, {"*": {"spin": 30, "then": "sat"}}), bench, ResourceLimits(1, 20, 4 * GiB))
    assert (r.result, r.status) == (Result.UNKNOWN, Status.TIMEOUT)
    assert r.cpu_time >= 0.9 and r.wall_time < 10


def test_crash(tmp_path, bench):
    r = run_job(stub(tmp_path, {"*": {"crash": 3}}), bench, QUICK)
    assert (r.result, r.status) == (Result.UNKNOWN, Status.CRASH)


def test_crash_after_printing_sat_is_not_sat(tmp_path, bench):
    cfg = SolverConfig("sh", "c", ("sh", "-c", "echo sat; exit 4", "{benchmark}"))
    assert run_job(cfg, bench, QUICK).status is Status.CRASH


HOG = """
import time
chunks = []
for _ in range(60):
    chunks.append(bytearray(16 * 2**20))
    time.sleep(0.05)
print("sat")
"""


def test_memory_limit(tmp_path, bench):
    cfg = SolverConfig("hog", "c", (sys.executable, "-c", HOG, "{benchmark}"))
    r = run_job(cfg, bench, ResourceLimits(20, 20, 256 * 2 ** 20))
    assert (r.result, r.status) == (Result.UNKNOWN, Status.MEMOUT)
    assert r.memory_enforced


def test_sudden_allocation_hits_backstop(tmp_path, bench):
    cfg = SolverConfig("hog", "c", (sys.executable, "-c", "x = bytearray(2**30); print('sat')", "{benchmark}"))
    r = run_job(cfg, bench, ResourceLimits(20, 20, 256 * 2 ** 20))
    assert r.result is Result.UNKNOWN and r.status in (Status.MEMOUT, Status.CRASH)


def test_missing_executable(bench):
    with pytest.raises(LaunchError):
        run_job(SolverConfig("x", "c", ("no-such-solver-binary", "{benchmark}")), bench, QUICK)


def test_missing_benchmark(tmp_path):
    with pytest.raises(LaunchError):
        run_job(stub(tmp_path, {"*": "sat"}), tmp_path / "absent.smt2", QUICK)


def test_children_are_cleaned_up(tmp_path, bench):
    cfg = stub(tmp_path, {"*": {"children": 3, "sleep": 30}})
    r = run_job(cfg, bench, ResourceLimits(10, 1, 4 * GiB))
    assert r.status is Status.TIMEOUT
    assert live_processes_mentioning(str(tmp_path / "stub.json")) == []


def test_children_cleaned_after_normal_exit(tmp_path, bench):
    cfg = stub(tmp_path, {"*": {"children": 2, "then": "sat"}})
    r = run_job(cfg, bench, QUICK)
    assert r.result is Result.SAT
    assert live_processes_mentioning(str(tmp_path / "stub.json")) == []


def test_monotone_in_limits(tmp_path, bench):
    cfg = stub(tmp_path, {"*": {"sleep": 0.3, "then": "unsat"}})
    small = run_job(cfg, bench, ResourceLimits(5, 2, 4 * GiB))
    large = run_job(cfg, bench, ResourceLimits(50, 20, 8 * GiB))
    assert small.result is large.result is Result.UNSAT


def test_campaign_cross_product_sorted_and_csv(tmp_path):
    benches = []
    for name in ("c", "a", "b"):
        p = tmp_path / f"{name}.smt2"
        p.write_text("")
        benches.append(str(p))
    configs = [stub(tmp_path, {"a.smt2": "sat", "*": "unknown"}, "s2"), stub(tmp_path, {"*": "unsat"}, "s1")]
    out = tmp_path / "jobs.csv"
    campaign = run_campaign(configs, benches, QUICK, parallelism=2, csv_path=out)
    assert len(campaign.records) == 6 and campaign.errors == []
    assert [r.sort_key for r in campaign.records] == sorted(r.sort_key for r in campaign.records)
    assert read_job_csv(out) == campaign.records
    header = out.read_text().splitlines()[0]
    assert header == "benchmark,solver,configuration,status,result,cpu_time,wallclock_time"


def test_campaign_survives_launch_errors(tmp_path, bench):
    configs = [SolverConfig("ghost", "c", ("no-such-solver-binary", "{benchmark}")), stub(tmp_path, {"*": "sat"})]
    campaign = run_campaign(configs, [str(bench)], QUICK)
    assert len(campaign.records) == 2 and len(campaign.errors) == 1
    ghost = [r for r in campaign.records if r.solver == "ghost"][0]
    assert (ghost.result, ghost.status) == (Result.UNKNOWN, Status.CRASH)


def test_duplicate_configs_rejected(tmp_path):
    cfg = stub(tmp_path, {"*": "sat"})
    with pytest.raises(ValueError):
        run_campaign([cfg, cfg], [], QUICK)
    with pytest.raises(ValueError):
        run_campaign([cfg], [], QUICK, parallelism=0)


def test_csv_parse_requires_columns():
    with pytest.raises(ValueError):
        parse_job_csv("benchmark,solver\nx,y\n")
    rec = JobRecord("b,1", "s", "c", Result.SAT, Status.COMPLETE, 1.5, 2.25)
    assert parse_job_csv(job_csv_text([rec])) == [rec]
