import numpy as np
import pytest

from despeck import SimilarityParams, calibrate


@pytest.fixture(scope="session")
def params_l1():
    """Calibrated 7x7 single-look similarity params shared by unit tests."""
    return calibrate(SimilarityParams(patch_half=3, looks=1.0), 200_000, rng_seed=101)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
