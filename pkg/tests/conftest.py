"""Shared fixtures and the acceptance-criteria result banner.

Acceptance tests register one line per criterion through record_criterion;
the terminal summary prints them all so a run ends with an explicit
PASS/FAIL line for each numbered criterion.
"""

import numpy as np
import pytest

_ACCEPTANCE: list[tuple[int, str, bool]] = []


def record_criterion(num: int, name: str, passed: bool) -> None:
    _ACCEPTANCE.append((num, name, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, passed in sorted(_ACCEPTANCE):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num} ({name}): {verdict}")


@pytest.fixture
def criterion_recorder():
    return record_criterion


@pytest.fixture
def rng():
    return np.random.default_rng(0)
