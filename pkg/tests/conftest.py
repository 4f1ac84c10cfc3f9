import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Collect validation results for the end-of-run acceptance summary."""

    def add(results):
        results = results if isinstance(results, list) else [results]
        ACCEPTANCE_LINES.extend(r.line() for r in results)
        return results

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
