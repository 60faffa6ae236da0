import numpy as np
import pytest

import pellel as pl


@pytest.fixture(scope="session")
def disk():
    return pl.Domain.ball(1.0)


@pytest.fixture(scope="session")
def disk_grid(disk):
    return pl.build_grid(disk, 1.0 / 32)


@pytest.fixture(scope="session")
def disk_grid_coarse(disk):
    return pl.build_grid(disk, 1.0 / 16)


@pytest.fixture(scope="session")
def gauss2():
    return pl.Weight.abs2(2)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
