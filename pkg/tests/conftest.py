import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20200619)


# -- acceptance reporting -------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = _criteria.get(report.nodeid)
    if marker is None:
        return
    number, text, state = marker
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = report.outcome
        if outcome == "skipped":
            outcome = "skip"
        _criteria[report.nodeid] = (number, text, outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = (m.args[0], m.args[1], "not run")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    grouped = {}
    for number, text, outcome in _criteria.values():
        grouped.setdefault((number, text), []).append(outcome)
    terminalreporter.section("acceptance criteria")
    for (number, text), outcomes in sorted(grouped.items()):
        if "failed" in outcomes:
            label = "FAIL"
        elif all(o == "skip" for o in outcomes):
            label = "SKIP"
        elif all(o in ("passed", "skip") for o in outcomes):
            label = "PASS"
        else:
            label = "NOT RUN"
        cases = f" ({len(outcomes)} cases)" if len(outcomes) > 1 else ""
        terminalreporter.write_line(f"[{label}] criterion {number}: {text}{cases}")
