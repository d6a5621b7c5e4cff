import numpy as np
import pytest

from cqwiretap.sampling import rng_for


@pytest.fixture
def rng():
    return rng_for(20240611)


def diag(*p):
    return np.diag(np.asarray(p, dtype=complex))
