import numpy as np
import pytest

from triality.core import DensityMatrix
from triality.sampling import random_density_batch


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def random_states(rng):
    """Factory: ``random_states(n, count)`` -> list of DensityMatrix."""

    def make(n, count):
        return [DensityMatrix(m) for m in random_density_batch(rng, n, count)]

    return make


PLUS = np.full((2, 2), 0.5)
QUTRIT_PLUS = np.full((3, 3), 1.0 / 3.0)
