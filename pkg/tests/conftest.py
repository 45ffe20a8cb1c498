import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion, reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or rep.failed:
        prev = _ACCEPTANCE.get(item.nodeid)
        if prev != "FAIL":
            _ACCEPTANCE[item.nodeid] = "PASS" if rep.passed else "FAIL"
        item.config._acceptance_labels = getattr(item.config, "_acceptance_labels", {})
        item.config._acceptance_labels[item.nodeid] = marker.args[0]


def pytest_terminal_summary(terminalreporter, config):
    labels = getattr(config, "_acceptance_labels", {})
    if not labels:
        return
    verdicts = {}
    for nodeid, label in labels.items():
        if verdicts.get(label) != "FAIL":
            verdicts[label] = _ACCEPTANCE[nodeid]
    terminalreporter.section("acceptance criteria")
    for label, verdict in verdicts.items():
        terminalreporter.write_line(f"{verdict:4}  {label}")
