import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(k, ok, detail)`` records one acceptance line and asserts ``ok``."""

    def record(k: int, ok: bool, detail: str):
        line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
