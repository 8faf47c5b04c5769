import json
import os
import sys
from pathlib import Path

import psutil
import pytest

HERE = Path(__file__).parent
CORPUS = HERE / "fixtures" / "corpus"
STUB = HERE / "stubs" / "stub_solver.py"

_acceptance_lines: list[str] = []


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.smt2"))


def annotated_track(path: Path) -> str:
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("; track:"), path
    return first.split(":", 1)[1].strip()


def stub_command(table_path) -> tuple[str, ...]:
    return (sys.executable, str(STUB), str(table_path), "{benchmark}")


def write_table(path: Path, table: dict) -> Path:
    path.write_text(json.dumps(table), encoding="utf-8")
    return path


def live_processes_mentioning(token: str) -> list[int]:
    found = []
    for p in psutil.process_iter():
        if p.pid == os.getpid():
            continue
        try:
            if p.status() != psutil.STATUS_ZOMBIE and token in p.cmdline():
                found.append(p.pid)
        except psutil.Error:
            continue
    return found


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}"
        if detail:
            line += f" ({detail})"
        _acceptance_lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
