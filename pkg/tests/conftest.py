"""Collects one verdict line per acceptance criterion and prints them at the end."""
import pytest

_VERDICTS = []


@pytest.fixture
def verdict(capsys):
    """Record ``(criterion, passed, detail)`` and echo it immediately."""

    def record(criterion, passed, detail):
        line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} | {detail}"
        _VERDICTS.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
