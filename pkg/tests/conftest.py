import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from logvar.grid import Grid
from logvar.potential import PotentialSpec, bind

settings.register_profile("logvar", deadline=None, max_examples=40, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("logvar")


@pytest.fixture(scope="session")
def grid1():
    return Grid(1, 12.0, 961)


@pytest.fixture(scope="session")
def flat1(grid1):
    return bind(PotentialSpec.constant(0.0), grid1)


@pytest.fixture(scope="session")
def well1(grid1):
    return bind(PotentialSpec.gaussian_well(0.5, 1.0, 0.0), grid1)


@pytest.fixture(scope="session")
def harmonic1(grid1):
    return bind(PotentialSpec.harmonic(), grid1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
