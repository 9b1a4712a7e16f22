import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nonspreading.core import make_grid

settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def sho_grid():
    return make_grid(-12.0, 12.0, 4096)


@pytest.fixture(scope="session")
def airy_grid():
    return make_grid(-60.0, 40.0, 8192)


def rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
