import pytest

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collector for one pass/fail line per acceptance criterion."""

    def record(criterion: int, ok: bool, detail: str) -> None:
        status = "PASS" if ok else "FAIL"
        line = f"criterion {criterion:2d}: {status}  {detail}"
        print(line)
        _acceptance_lines.append(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
