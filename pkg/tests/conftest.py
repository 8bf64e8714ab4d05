import numpy as np
import pytest

from denseflow.synthetic import make_scene

_acceptance_results = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def shift1_scene():
    return make_scene("translation", 64, 64, seed=7, dx=1.0, dy=0.0)


@pytest.fixture(scope="session")
def shift10_scene():
    return make_scene("translation", 128, 128, seed=7, dx=10.0, dy=0.0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance_results.append((marker.args[0], status, marker.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title in sorted(_acceptance_results):
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")
