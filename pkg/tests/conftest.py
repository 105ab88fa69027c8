# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import numpy as np
import pytest

from tests.helpers import model_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20260419)


@pytest.fixture
def small_data(rng):
    data, _ = model_instance(rng, p=30, q=5, fill=0.6)
    return data
