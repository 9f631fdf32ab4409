import numpy as np
import pytest

from brinkman_lab.grid import Grid
from brinkman_lab.growth import make_linear_growth


@pytest.fixture
def unit_law():
    return make_linear_growth(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid1d():
    return Grid(1, 8.0, 256)


def smooth_bump(x, center, width):
    """C^1 bump ``cos^2`` profile supported on ``|x - center| < width``."""
    r = np.abs(x - center) / width
    return np.where(r < 1.0, np.cos(0.5 * np.pi * r) ** 2, 0.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
