import numpy as np
import pytest

from machlab.field import SpectralField, VecField
from machlab.grid import Grid
from machlab.lp import get_filter_bank


@pytest.fixture(scope="session")
def grid32():
    return Grid(32)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64)


@pytest.fixture(scope="session")
def bank32(grid32):
    return get_filter_bank(grid32)


@pytest.fixture(scope="session")
def bank64(grid64):
    return get_filter_bank(grid64)


def random_field(grid, rng, kmax=None):
    """Real random field band-limited to |k| <= kmax (dealias ball default)."""
    hat = np.zeros(grid.spectral_shape, dtype=complex)
    mask = grid.dealias_mask if kmax is None else (grid.k_abs <= kmax)
    hat[mask] = rng.standard_normal(int(mask.sum())) + 1j * rng.standard_normal(int(mask.sum()))
    f = SpectralField.from_hat(grid, hat)
    return SpectralField.from_values(grid, f.values)


def random_vec(grid, rng, kmax=None):
    return VecField([random_field(grid, rng, kmax) for _ in range(3)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
