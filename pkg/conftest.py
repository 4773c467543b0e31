import numpy as np
import pytest

from src.schemes.instances import ProblemInstance, make_instance


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo acceptance checks")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def small_instance() -> ProblemInstance:
    """N = 2 with x_bar = p_bar = 0.3, A = 0.09."""
    return make_instance(2, xs=[0.2, 0.4], ps=[0.1, 0.5])


@pytest.fixture
def switch_example() -> ProblemInstance:
    """N = 5, x_bar = p_bar = 0.2, so N²A = 1."""
    return make_instance(5, xs=[0.2] * 5, ps=[0.2] * 5)
