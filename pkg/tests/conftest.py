import numpy as np
import pytest

from specband import dynsys as ds


@pytest.fixture(scope="session")
def fib():
    return ds.fibonacci_point()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
