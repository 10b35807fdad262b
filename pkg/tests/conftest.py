import numpy as np
import pytest

from qportrait.sampler import Rng, random_density


@pytest.fixture
def rng():
    return Rng(seed=2024, stream=0)


@pytest.fixture
def maxmixed3():
    return np.eye(3) / 3


def qutrit_states(n, seed=11):
    """n random qutrit states cycling through ranks 1..3."""
    return [random_density(3, 1 + i % 3, Rng(seed, i)) for i in range(n)]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
