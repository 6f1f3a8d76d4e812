import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; printed again in the terminal summary."""
    def record(tag, ok, detail):
        line = f"{tag}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        _LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
