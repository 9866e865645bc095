import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Collects one PASS/FAIL line per acceptance criterion."""

    def record(label: str, value: float, tol: float, passed: bool):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: worst={value:.3e} tol={tol:.0e}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
