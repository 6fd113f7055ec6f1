from __future__ import annotations

from pathlib import Path

import pytest

from specfuzz.minilang import load_program

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "specfuzz" / "fixtures"

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture(scope="session")
def min_program():
    return load_program(FIXTURES / "min.mo")


@pytest.fixture(scope="session")
def slist_program():
    return load_program(FIXTURES / "slist.mo")


@pytest.fixture(scope="session")
def composite_program():
    return load_program(FIXTURES / "composite.mo")


@pytest.fixture(scope="session")
def counter_program():
    return load_program(FIXTURES / "counter.mo")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
