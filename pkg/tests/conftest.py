"""Shared pytest plumbing.

The acceptance tests register one verdict per numbered criterion here;
a terminal-summary hook prints them as a compact PASS/FAIL table at the
end of the run so the outcome survives output capturing.
"""

_CRITERIA = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    _CRITERIA[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {detail}")
