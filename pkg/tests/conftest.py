import pytest

# One line per acceptance criterion, printed after the run so the
# verdicts survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


class CriterionGuard:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "FAIL" if exc_type else "PASS"
        ACCEPTANCE_LINES.append(f"[{verdict}] {self.name}")
        return False


@pytest.fixture
def criterion():
    """Context manager recording a pass/fail line for one criterion."""
    return CriterionGuard


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
