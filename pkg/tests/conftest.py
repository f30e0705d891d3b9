import numpy as np
import pytest

from lrkinetic.phasespace import PhaseSpaceGrid, gaussian_field
from lrkinetic.spectrum import DEFAULT_MODEL, jump_measure


@pytest.fixture(scope="session")
def model():
    return DEFAULT_MODEL


@pytest.fixture(scope="session")
def jump(model):
    return jump_measure(model)


@pytest.fixture(scope="session")
def grid():
    return PhaseSpaceGrid()


@pytest.fixture(scope="session")
def w0(grid):
    return gaussian_field(grid)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
