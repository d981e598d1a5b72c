"""Shared pytest hooks: a one-line verdict per acceptance criterion."""

import pytest

_verdicts: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def criterion(record_property):
    """Tag an acceptance test with its number and title."""
    def tag(number: int, title: str):
        record_property("criterion", (number, title))
    return tag


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    tags = [value for key, value in report.user_properties if key == "criterion"]
    if not tags:
        return
    number, title = tags[0]
    detail = ""
    if report.failed:
        crash = getattr(report.longrepr, "reprcrash", None)
        detail = crash.message.splitlines()[0] if crash else "error"
    _verdicts[number] = ("PASS" if report.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        verdict, title, detail = _verdicts[number]
        line = f"{verdict} criterion {number}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
