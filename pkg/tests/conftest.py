"""Shared test plumbing: acceptance-criterion result collection.

Acceptance tests call record() with a criterion label and a boolean;
each call prints an immediate pass/fail line and the terminal summary
repeats one line per criterion at the end of the run.
"""

CRITERIA: list[tuple[str, bool, str]] = []


def record(label: str, passed: bool, detail: str = "") -> None:
    verdict = "PASS" if passed else "FAIL"
    line = f"[{verdict}] {label}"
    if detail:
        line += f" :: {detail}"
    CRITERIA.append((label, passed, detail))
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in CRITERIA:
        verdict = "PASS" if passed else "FAIL"
        line = f"[{verdict}] {label}"
        if detail:
            line += f" :: {detail}"
        terminalreporter.write_line(line)
