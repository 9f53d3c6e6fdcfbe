from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

FIXTURES = Path(__file__).parent / "fixtures"
PROTOCOL = FIXTURES / "protocol"

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def planar():
    """Three residues lying in the xy-plane."""
    return np.array(
        [
            [[1.4, 0.0, 0.0], [0.0, 0.0, 0.0], [-0.5, 1.4, 0.0]],
            [[0.3, 2.6, 0.0], [1.1, 3.8, 0.0], [2.5, 3.5, 0.0]],
            [[3.2, 4.6, 0.0], [4.6, 4.4, 0.0], [5.0, 5.8, 0.0]],
        ]
    )
