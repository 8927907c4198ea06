import pytest

_RECORDS = []


@pytest.fixture
def criterion():
    """Recorder for the acceptance suite: one PASS/FAIL line per criterion."""

    def record(num: int, passed: bool, detail: str) -> None:
        _RECORDS.append((int(num), bool(passed), str(detail)))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RECORDS:
        return
    terminalreporter.section("acceptance criteria")
    for num, passed, detail in sorted(_RECORDS):
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"CRITERION {num}: {word} - {detail}")
