"""Collects acceptance verdicts and prints one line per criterion at the end."""

from __future__ import annotations

import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
_module_failures: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    prev = ACCEPTANCE.get(criterion)
    if prev is not None:
        ok, detail = prev[0] and ok, f"{prev[1]}; {detail}"
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_runtest_logreport(report):
    if report.when == "call" or report.outcome == "failed":
        if report.failed and "test_acceptance.py" not in report.nodeid:
            _module_failures.append(report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    if 8 in ACCEPTANCE:
        ok, detail = ACCEPTANCE[8]
        suites = "all module invariant suites green" if not _module_failures else (
            f"{len(_module_failures)} module test(s) failed, first {_module_failures[0]}")
        ACCEPTANCE[8] = (ok and not _module_failures, f"{detail}; {suites}")
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        tr.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture
def accept():
    return record
