import numpy as np
import pytest

from cvqss.config import load_preset


@pytest.fixture(scope="session")
def presets():
    names = ("cc-23", "cc-35", "cq-23", "cq-35", "qq-23", "qq-35")
    return {n: load_preset(n) for n in names}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance summary ----------------------------------------------------

_criteria: dict[int, tuple[str, list[bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = mark.args
        _criteria.setdefault(number, (title, []))[1].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, results = _criteria[number]
        status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title} ({sum(results)}/{len(results)} checks)")
