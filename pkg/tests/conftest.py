import warnings

import numpy as np
import pytest
from hypothesis import settings

from dimlab import kernels

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture
def line4():
    from dimlab import PointCloud

    return PointCloud.from_points(np.array([0.0, 0.3, 0.6, 0.9]))


@pytest.fixture
def both_backends():
    """Run a test body under each available backend."""
    names = ["python"] + (["compiled"] if kernels.compiled_available() else [])
    prev = kernels.BACKEND
    yield names
    kernels.use_backend(prev)


@pytest.fixture(autouse=True)
def _quiet_mesh_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=UserWarning)
        yield


@pytest.fixture(scope="session")
def cantor_fx():
    from dimlab import presets

    return presets.cantor()


@pytest.fixture(scope="session")
def sequence_fx():
    from dimlab import presets

    return presets.sequence()
