"""Run solver configurations on benchmarks under CPU, wall-clock and memory limits."""

from __future__ import annotations

import csv
import enum
import io
import logging
import os
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import psutil

try:
    import resource
except ImportError:  # pragma: no cover - non-POSIX
    resource = None

log = logging.getLogger(__name__)

PLACEHOLDER = "{benchmark}"
GiB = 1 << 30
POLL_INTERVAL = 0.05

CSV_HEADER = ("benchmark", "solver", "configuration", "status", "result", "cpu_time",
              "wallclock_time")


class LaunchError(RuntimeError):
    """The solver could not be started at all (as opposed to crashing)."""


class Result(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"

    @property
    def solved(self) -> bool:
        return self is not Result.UNKNOWN


class Status(str, enum.Enum):
    COMPLETE = "complete"
    TIMEOUT = "timeout"
    MEMOUT = "memout"
    CRASH = "crash"


@dataclass(frozen=True)
class SolverConfig:
    solver: str
    configuration: str
    command: tuple[str, ...]
    hors_concours: bool = False

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(self.command))
        count = sum(arg.count(PLACEHOLDER) for arg in self.command)
        if count != 1:
            raise ValueError(
                f"{self.solver}/{self.configuration}: command must contain {PLACEHOLDER} "
                f"exactly once (found {count})")

    def argv(self, benchmark) -> list[str]:
        return [arg.replace(PLACEHOLDER, str(benchmark)) for arg in self.command]


@dataclass(frozen=True)
class ResourceLimits:
    cpu: float
    wall: float
    memory: int

    def __post_init__(self):
        if self.cpu <= 0 or self.wall <= 0 or self.memory <= 0:
            raise ValueError(f"resource limits must be positive: {self}")


TEST_LIMITS = ResourceLimits(600, 600, 64 * GiB)
COMPETITION_LIMITS = ResourceLimits(1800, 1800, 64 * GiB)
PRESETS = {"test": TEST_LIMITS, "competition": COMPETITION_LIMITS}


@dataclass(frozen=True)
class JobRecord:
    benchmark: str
    solver: str
    configuration: str
    result: Result
    status: Status
    cpu_time: float
    wall_time: float
    memory_enforced: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "result", Result(self.result))
        object.__setattr__(self, "status", Status(self.status))
        object.__setattr__(self, "cpu_time", round(float(self.cpu_time), 2))
        object.__setattr__(self, "wall_time", round(float(self.wall_time), 2))
        if self.result.solved and self.status is not Status.COMPLETE:
            raise ValueError(f"{self.result.value} result with status {self.status.value}")
        if self.cpu_time < 0 or self.wall_time < 0:
            raise ValueError("negative time")

    @property
    def sort_key(self) -> tuple[str, str, str]:
        return (self.benchmark, self.solver, self.configuration)


def parse_verdict(output: str) -> Result:
    """Exact match on the first non-empty line; later lines are ignored."""
    for line in output.splitlines():
        token = line.strip()
        if token:
            if token == "sat":
                return Result.SAT
            if token == "unsat":
                return Result.UNSAT
            return Result.UNKNOWN
    return Result.UNKNOWN


# --- a single job -------------------------------------------------------------------

# Applied in the child between fork and exec via a tiny Python shim, which keeps
# Popen free of preexec_fn (unsafe with the campaign's worker threads).
# The memory limit proper is enforced on the sampled RSS of the whole process
# tree; RLIMIT_AS only backstops a single runaway process, at twice the limit
# because address space overshoots resident memory.
_LIMIT_SHIM = """\
import os, resource, sys
cpu, mem = int(sys.argv[1]), int(sys.argv[2])
resource.setrlimit(resource.RLIMIT_CPU, (cpu, cpu + 2))
try:
    resource.setrlimit(resource.RLIMIT_AS, (mem, mem))
except (ValueError, OSError):
    pass
os.execvp(sys.argv[3], sys.argv[3:])
"""


def _tree(pid: int) -> list[psutil.Process]:
    try:
        root = psutil.Process(pid)
        return [root] + root.children(recursive=True)
    except psutil.Error:
        return []


def _sample(procs: Iterable[psutil.Process]) -> tuple[float, int]:
    cpu, rss = 0.0, 0
    for p in procs:
        try:
            t = p.cpu_times()
            cpu += t.user + t.system + t.children_user + t.children_system
            rss += p.memory_info().rss
        except psutil.Error:
            continue
    return cpu, rss


def _group_members(pgid: int) -> list[psutil.Process]:
    members = []
    for p in psutil.process_iter():
        try:
            if os.getpgid(p.pid) == pgid and p.status() != psutil.STATUS_ZOMBIE:
                members.append(p)
        except (OSError, psutil.Error):
            continue
    return members


def _kill_group(pgid: int, extra: Iterable[psutil.Process] = ()) -> None:
    try:
        os.killpg(pgid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass
    for p in extra:
        try:
            p.kill()
        except psutil.Error:
            pass


def _reap_group(pgid: int, extra: Iterable[psutil.Process] = (), grace: float = 5.0) -> None:
    """Kill the job's process group and wait until none of it is still running."""
    extra = list(extra)
    deadline = time.monotonic() + grace
    while True:
        _kill_group(pgid, extra)
        alive = [p for p in _group_members(pgid) + extra if _running(p)]
        if not alive or time.monotonic() > deadline:
            break
        psutil.wait_procs(alive, timeout=0.1)
    for p in alive:
        log.warning("process %d of job group %d survived SIGKILL", p.pid, pgid)


def _running(p: psutil.Process) -> bool:
    try:
        return p.is_running() and p.status() != psutil.STATUS_ZOMBIE
    except psutil.Error:
        return False


def _resolve(executable: str) -> str:
    found = shutil.which(executable)
    if found is None:
        raise LaunchError(f"executable not found: {executable}")
    return found


def run_job(config: SolverConfig, benchmark, limits: ResourceLimits) -> JobRecord:
    """Run one configuration on one benchmark; solver misbehaviour never raises."""
    argv = config.argv(benchmark)
    argv[0] = _resolve(argv[0])
    if not Path(benchmark).is_file():
        raise LaunchError(f"benchmark not readable: {benchmark}")
    enforced = resource is not None
    if enforced:
        cpu_cap = max(1, int(limits.cpu + 0.999))
        argv = [sys.executable, "-S", "-c", _LIMIT_SHIM, str(cpu_cap), str(2 * limits.memory)] + argv

    with tempfile.TemporaryFile() as out:
        start = time.monotonic()
        try:
            proc = subprocess.Popen(argv, stdin=subprocess.DEVNULL, stdout=out,
                                    stderr=subprocess.DEVNULL, start_new_session=True)
        except OSError as exc:
            raise LaunchError(f"cannot start {argv[0]}: {exc}") from exc
        pgid = proc.pid
        killed: Optional[Status] = None
        seen: dict[int, psutil.Process] = {}
        tree_cpu = 0.0
        last_sample = 0.0
        try:
            while True:
                pid, wstatus, usage = os.wait4(proc.pid, os.WNOHANG)
                if pid:
                    break
                now = time.monotonic()
                if killed is None and now - start > limits.wall:
                    killed = Status.TIMEOUT
                    _kill_group(pgid, seen.values())
                elif killed is None and now - last_sample >= 2 * POLL_INTERVAL:
                    last_sample = now
                    procs = _tree(proc.pid)
                    seen.update((p.pid, p) for p in procs)
                    cpu, rss = _sample(procs)
                    tree_cpu = max(tree_cpu, cpu)
                    if cpu > limits.cpu:
                        killed = Status.TIMEOUT
                        _kill_group(pgid, seen.values())
                    elif rss > limits.memory:
                        killed = Status.MEMOUT
                        _kill_group(pgid, seen.values())
                time.sleep(POLL_INTERVAL)
        finally:
            wall = time.monotonic() - start
            # descendants may outlive the solver; the whole group goes down with it
            _reap_group(pgid, seen.values())
            proc.returncode = proc.returncode if proc.returncode is not None else -1
        cpu_time = max(tree_cpu, usage.ru_utime + usage.ru_stime)

        status = killed
        if status is None and os.WIFSIGNALED(wstatus):
            sig = os.WTERMSIG(wstatus)
            if sig == signal.SIGXCPU or (sig == signal.SIGKILL and cpu_time >= limits.cpu):
                status = Status.TIMEOUT
            else:
                status = Status.CRASH
        elif status is None and os.WEXITSTATUS(wstatus) != 0:
            status = Status.CRASH
        result = Result.UNKNOWN
        if status is None:
            status = Status.COMPLETE
            out.seek(0)
            result = parse_verdict(out.read(64 * 1024).decode("utf-8", errors="replace"))

    return JobRecord(str(benchmark), config.solver, config.configuration, result, status,
                     cpu_time, wall, memory_enforced=enforced)


# --- campaigns ------------------------------------------------------------------------


@dataclass
class Campaign:
    records: list[JobRecord]
    errors: list[str] = field(default_factory=list)


def run_campaign(configs: Sequence[SolverConfig], benchmarks: Sequence, limits: ResourceLimits,
                 parallelism: int = 1, csv_path=None) -> Campaign:
    """Run the full cross product; one record per pair, sorted by (benchmark, solver, configuration).

    A job that cannot be launched is recorded as (unknown, crash) and its error kept
    in :attr:`Campaign.errors`; the campaign itself does not abort.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be at least 1")
    keys = {(c.solver, c.configuration) for c in configs}
    if len(keys) != len(configs):
        raise ValueError("duplicate (solver, configuration) pair")
    jobs = [(c, b) for c in configs for b in benchmarks]
    errors: list[str] = []

    def one(job):
        config, bench = job
        try:
            return run_job(config, bench, limits)
        except LaunchError as exc:
            log.warning("%s/%s on %s: %s", config.solver, config.configuration, bench, exc)
            errors.append(f"{config.solver}/{config.configuration} {bench}: {exc}")
            return JobRecord(str(bench), config.solver, config.configuration,
                             Result.UNKNOWN, Status.CRASH, 0.0, 0.0)

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        records = sorted(pool.map(one, jobs), key=lambda r: r.sort_key)
    if csv_path is not None:
        write_job_csv(records, csv_path)
    return Campaign(records, sorted(errors))


# --- job-information CSV -------------------------------------------------------------


def job_csv_text(records: Iterable[JobRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.benchmark, r.solver, r.configuration, r.status.value, r.result.value,
                         f"{r.cpu_time:.2f}", f"{r.wall_time:.2f}"])
    return buf.getvalue()


def write_job_csv(records: Iterable[JobRecord], path) -> None:
    Path(path).write_text(job_csv_text(records), encoding="utf-8")


def parse_job_csv(text: str) -> list[JobRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_HEADER) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"job CSV lacks columns: {', '.join(sorted(missing))}")
    return [JobRecord(row["benchmark"], row["solver"], row["configuration"], row["result"],
                      row["status"], float(row["cpu_time"]), float(row["wallclock_time"]))
            for row in reader]


def read_job_csv(path) -> list[JobRecord]:
    return parse_job_csv(Path(path).read_text(encoding="utf-8"))
