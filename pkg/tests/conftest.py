import numpy as np
import pytest

from blocknorm.falsifier import random_pd, random_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20241014)


def ginibre(n, rng, cols=None):
    cols = n if cols is None else cols
    return (rng.standard_normal((n, cols)) + 1j * rng.standard_normal((n, cols))) / np.sqrt(2)


def random_hermitian(n, rng):
    z = ginibre(n, rng)
    return 0.5 * (z + z.conj().T)


WEIGHTED_SHIFT = np.array([[0, 2, 0], [0, 0, 3], [1, 0, 0]], dtype=complex)
CYCLIC = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)

__all__ = ["ginibre", "random_hermitian", "random_pd", "random_unitary", "WEIGHTED_SHIFT", "CYCLIC"]
