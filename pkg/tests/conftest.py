import pytest

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        doc = report.user_properties and dict(report.user_properties).get("criterion")
        _acceptance.append((doc or report.nodeid, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name} ({duration:.2f} s)")


@pytest.fixture
def criterion(record_property):
    def name(text):
        record_property("criterion", text)
    return name
