import numpy as np
import pytest

from quditcat.fock import shared_basis


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


@pytest.fixture
def basis_3_20():
    return shared_basis(3, 20)


@pytest.fixture
def basis_3_10():
    return shared_basis(3, 10)


def random_phase_point(rng, D, radius=1.0):
    return rng.uniform(-radius, radius, D - 1) + 1j * rng.uniform(
        -radius, radius, D - 1
    )
