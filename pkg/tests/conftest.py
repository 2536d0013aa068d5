import numpy as np
import pytest

from brownian_argmax import rng
from brownian_argmax.brownian import BrownianGrid, simulate


@pytest.fixture
def stream():
    return rng.stream_for(20240601, 0, rng.NS_AUX)


def random_grid(m, n, seed, stream_id=0):
    return simulate(m, n, rng.stream_for(seed, stream_id, rng.NS_AUX))


def float_grid(m, n, seed):
    """Grid with unrounded values, for checks that must not rely on the dyadic lattice."""
    g = np.random.default_rng(seed)
    values = np.hstack([np.zeros((m, 1)), np.cumsum(g.standard_normal((m, n)) / np.sqrt(n), axis=1)])
    return BrownianGrid(values)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
