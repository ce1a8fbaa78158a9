import contextlib

ACCEPTANCE_LINES: list[str] = []


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record one PASS/FAIL line for an acceptance criterion."""
    notes: list[str] = []
    try:
        yield notes
    except BaseException as exc:
        line = f"criterion {number} FAIL  {title}: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"criterion {number} PASS  {title}" + (f" ({'; '.join(notes)})" if notes else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
