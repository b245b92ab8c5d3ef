import pytest

_ACCEPTANCE: list[tuple[int, str, bool]] = []


def _record(num: int, name: str, passed: bool) -> None:
    _ACCEPTANCE.append((num, name, passed))


@pytest.fixture
def criterion_recorder():
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("bridge acceptance")
    for num, name, passed in sorted(_ACCEPTANCE):
        terminalreporter.write_line(
            f"criterion {num} ({name}): {'PASS' if passed else 'FAIL'}")
