"""Report one pass/fail line per acceptance criterion at the end of the run."""

import pytest

_OUTCOMES: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        title_, states = _OUTCOMES.setdefault(number, (title, []))
        states.append("FAIL" if failed else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, states = _OUTCOMES[number]
        verdict = "PASS" if states and all(s == "PASS" for s in states) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
