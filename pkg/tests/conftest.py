import numpy as np
import pytest

from cvedr import make_vacuum

ACCEPTANCE_LINES = []


@pytest.fixture
def vacuum():
    return make_vacuum()


def random_physical_cov(rng, max_r=1.2, max_nu=3.0):
    """Rotated squeezed thermal covariance: det = nu^2 >= 1."""
    r = rng.uniform(0, max_r)
    th = rng.uniform(0, np.pi)
    nu = rng.uniform(1.0, max_nu)
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    cov = nu * rot @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ rot.T
    return (cov + cov.T) / 2


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
