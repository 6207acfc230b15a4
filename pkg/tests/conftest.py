import math

import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion covered by the test"
    )


def within_factor(value, ref, factor=100.0):
    """``ref / factor <= value <= ref * factor`` (both positive and finite)."""
    if not (math.isfinite(value) and value > 0):
        return False
    return ref / factor <= value <= ref * factor


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ran": 0, "failed": 0})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["ran"] += 1
        if report.outcome != "passed":
            entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=lambda n: (len(n), n)):
        entry = _criteria[number]
        if not entry["ran"]:
            status = "SKIP"
        elif entry["failed"]:
            status = f"FAIL ({entry['failed']} of {entry['ran']} checks failed)"
        else:
            status = f"PASS ({entry['ran']} checks)"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
