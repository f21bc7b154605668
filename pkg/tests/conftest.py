import numpy as np
import pytest

from nilspec import kernels

_CRITERIA = {}  # number -> [description, passed (None until a test runs), nodeids]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by the test")


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        num, text = mark.args
        entry = _CRITERIA.setdefault(num, [text, None, []])
        entry[2].append(item.nodeid)


def pytest_runtest_logreport(report):
    for entry in _CRITERIA.values():
        if report.nodeid not in entry[2]:
            continue
        if report.failed or (report.skipped and report.when == "call"):
            entry[1] = False
        elif report.when == "call" and entry[1] is None:
            entry[1] = True


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        text, ok, _ = _CRITERIA[num]
        status = "NOT RUN" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}  {text}")


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
