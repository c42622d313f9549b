import os

import numpy as np
import pytest


def _seed() -> int:
    raw = os.environ.get("QKD_SEED", "")
    return int(raw, 0) if raw else 0xC0FFEE


@pytest.fixture
def rng():
    """Deterministic generator; QKD_SEED overrides the default seed."""
    return np.random.default_rng(_seed())
