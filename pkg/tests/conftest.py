import numpy as np
import pytest

from irsmin.channel import ScenarioGeometry
from irsmin.objective import SystemParams


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def geometry():
    return ScenarioGeometry.default()


@pytest.fixture
def unit_params():
    """O(1)-scale link budget; default margin scale resolves to 1."""
    return SystemParams(p=1.0, sigma2=1.0, gamma=1.0)
