import numpy as np
import pytest

from multiview.multiview_dmc import random_dmc

# fixed 3x3 channel used wherever a "random DMC" is called for
RANDOM_SEED = 0


@pytest.fixture(scope="session")
def random3():
    return random_dmc(np.random.default_rng(RANDOM_SEED), 3, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
