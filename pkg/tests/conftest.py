from __future__ import annotations

import numpy as np
import pytest

from spikedcov.model import SpikedScenario, gen_spiked_data, sample_covariance


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_data(rng):
    """40 x 12 draw from a two-spike scenario with its spectrum."""
    x = gen_spiked_data(SpikedScenario(40, 12, (9.0, 4.0)), rng)
    return x, sample_covariance(x)


@pytest.fixture
def wide_data(rng):
    x = gen_spiked_data(SpikedScenario(15, 40, (20.0, 8.0)), rng)
    return x, sample_covariance(x)
