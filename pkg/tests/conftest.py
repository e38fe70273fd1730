import numpy as np
import pytest

from structboost import lp as lpmod

GAP_TOL = 1e-8


def _check_gap(lp, sol):
    if sol.optimal:
        res = lpmod.residuals(lp, sol)
        assert res["gap"] <= GAP_TOL, f"duality gap {res['gap']:.3e}"


@pytest.fixture(autouse=True)
def duality_gap_watch():
    """Every optimal LP solve during every test must close the duality gap."""
    lpmod.add_observer(_check_gap)
    yield
    lpmod.remove_observer(_check_gap)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import report

    if report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in report.LINES:
            terminalreporter.write_line(line)
