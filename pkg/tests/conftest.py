import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("lpfisher", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lpfisher")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid():
    from lpfisher.grid import GridSpec

    return GridSpec.uniform(100)
