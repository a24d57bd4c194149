import numpy as np
import pytest

from dynit.distributions import Scenario


@pytest.fixture
def scn():
    return Scenario.standard()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
