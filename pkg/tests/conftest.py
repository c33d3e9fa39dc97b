import pytest

from dkg_lab import Params, make_grid
from dkg_lab.state import to_diagonal

from helpers import smooth_physical_state


@pytest.fixture
def grid32():
    return make_grid(32)


@pytest.fixture
def grid64():
    return make_grid(64)


@pytest.fixture
def params():
    return Params(M=1.0, m=1.0, g=1.0)


@pytest.fixture
def smooth64(grid64, params):
    p = smooth_physical_state(grid64)
    return p, to_diagonal(p, params)
