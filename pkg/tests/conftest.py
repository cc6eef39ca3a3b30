import numpy as np
import pytest

from infogeom import models as M
from infogeom.spaces import Finite


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bern():
    return M.bernoulli()


@pytest.fixture
def lumped():
    # p(x) = (x, (1-x)/2, (1-x)/2): the class {2, 3} is sufficient
    return M.expression_model(["x1", "(1-x1)/2", "(1-x1)/2"], Finite(3), [(0.0, 1.0)])


@pytest.fixture
def quadratic():
    # p(x) = (x, x^2, 1-x-x^2), positive for x in (0, 0.6)
    return M.expression_model(["x1", "x1^2", "1-x1-x1^2"], Finite(3), [(0.0, 0.6)])



def _sort_key(key):
    return (int(key.rstrip("abcd")), key)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for n, m in list(sys.modules.items()) if n.endswith("test_acceptance")), None)
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=_sort_key):
            terminalreporter.write_line(lines[key])
