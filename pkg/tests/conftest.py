"""Shared pytest wiring: the acceptance-criteria registry and its
end-of-run report."""

ACCEPTANCE_RESULTS = {}


def record_acceptance(number, title, passed, detail=""):
    """Register one criterion verdict for the terminal summary."""
    ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[num]
        flag = "PASS" if passed else "FAIL"
        line = f"[{flag}] criterion {num:2d}: {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
