import numpy as np
import pytest

from mfkg import CouplingProfile, PolynomialPotential, make_grid


@pytest.fixture(scope="session")
def grid():
    # small enough to keep every test fast, long enough that Gaussian tails
    # at the boundary sit far below double precision
    return make_grid(1, 256, 64.0)


@pytest.fixture(scope="session")
def rho(grid):
    return CouplingProfile.gaussian(grid, amplitude=2.0, width=1.0)


@pytest.fixture(scope="session")
def pot():
    return PolynomialPotential((-1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(7)
