import pytest

ACCEPTANCE_COUNT = 10
_RESULTS = {}


@pytest.fixture
def acceptance():
    """Record one acceptance criterion outcome for the terminal summary."""
    def record(number, passed, detail):
        _RESULTS[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, ACCEPTANCE_COUNT + 1):
        if number in _RESULTS:
            passed, detail = _RESULTS[number]
            tag = "PASS" if passed else "FAIL"
        else:
            tag, detail = "NOT RUN", ""
        terminalreporter.write_line(f"criterion {number:>2}: {tag}  {detail}")
