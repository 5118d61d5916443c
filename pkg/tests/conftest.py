import numpy as np
import pytest

from dyncorr import config


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _reset_tolerances():
    config.set_tolerances(None)
    yield
    config.set_tolerances(None)
