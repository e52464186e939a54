import numpy as np
import pytest

from geoquant import fuchsian


@pytest.fixture(scope="session")
def genus2_group():
    return fuchsian.genus2_group(12, 9.0)


@pytest.fixture(scope="session")
def small_group():
    # cheap enumeration for tests that only need the first few shells
    return fuchsian.genus2_group(6, 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
