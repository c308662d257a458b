import numpy as np
import pytest

from neutral_ldp.core.grid import TimeGrid, constant_initial
from neutral_ldp.models.builtin import SCHILDER, TEST_1, builtin
from neutral_ldp.solvers.deterministic import solve_limit_ode


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_grid():
    """tau = 1/4, T = 1, h = 1/16: four lag cells, sixteen forward cells."""
    return TimeGrid(tau=0.25, T=1.0, h=1.0 / 16)


@pytest.fixture
def delay_grid():
    """tau = T = 1 so the TEST-1 neutral term reads the initial segment on the whole horizon."""
    return TimeGrid(tau=1.0, T=1.0, h=1.0 / 64)


@pytest.fixture
def schilder():
    return builtin(SCHILDER)


@pytest.fixture
def test1():
    return builtin(TEST_1)


@pytest.fixture
def test1_setup(test1, delay_grid):
    """TEST-1 from xi = 1 with its limit path."""
    xi = constant_initial(delay_grid, 1.0, test1.dim_d)
    return test1, delay_grid, xi, solve_limit_ode(test1, xi, delay_grid)


@pytest.fixture
def schilder_setup(schilder, small_grid):
    xi = constant_initial(small_grid, 0.0, schilder.dim_d)
    return schilder, small_grid, xi, solve_limit_ode(schilder, xi, small_grid)
