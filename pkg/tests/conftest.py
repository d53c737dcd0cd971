import pytest

from projchoice import Params

PARAM_GRID = [Params(a, b) for a in (0.0, 0.25, 0.5, 0.75)
              for b in (0.0, 0.25, 0.5, 0.75)]

_acceptance = []


@pytest.fixture(params=PARAM_GRID, ids=lambda p: f"u{p.u_min}-v{p.v_min}")
def params(request):
    return request.param


@pytest.fixture
def origin():
    return Params(0.0, 0.0)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
