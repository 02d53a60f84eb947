import pytest

VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line, then assert it."""

    def record(num, ok, detail):
        VERDICTS.append((num, bool(ok), detail))
        assert ok, f"criterion {num}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(VERDICTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
