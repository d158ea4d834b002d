"""Acceptance summary: one PASS/FAIL line per criterion at the end of the run."""

import pytest

_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    if failed or cid not in _RESULTS:
        if rep.when == "call" or failed:
            _RESULTS[cid] = (title, "FAIL" if failed else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: int(c[2:])):
        title, status = _RESULTS[cid]
        terminalreporter.write_line(f"{cid} {title}: {status}")
