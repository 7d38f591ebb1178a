import math

import numpy as np
import pytest
from hypothesis import settings

from nschlab.spectral import make_grid

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")

TWO_PI = 2 * math.pi
VOL = TWO_PI**3

# Lines appended by the acceptance tests, echoed in the terminal summary.
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def g8():
    return make_grid(3, 8)


@pytest.fixture(scope="session")
def g16():
    return make_grid(3, 16)


@pytest.fixture(scope="session")
def g2d():
    return make_grid(2, 16)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
