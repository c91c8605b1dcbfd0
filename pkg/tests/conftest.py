import pytest

CRITERION_LINES: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(result):
        CRITERION_LINES[result.number] = result.line()
        return result
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERION_LINES):
        terminalreporter.write_line(CRITERION_LINES[n])
