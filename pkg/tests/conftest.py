from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("gmps", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("gmps")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
