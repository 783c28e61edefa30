"""Make the loopqr package importable from a checkout and share common configs."""
import math
import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))

from loopqr.models import GkpCode, RepeaterConfig  # noqa: E402


@pytest.fixture
def zero_noise():
    """Ideal GKP states and (numerically) lossless loops: every Pauli probability is exactly 0."""
    config = RepeaterConfig(length_km=1000.0, n=10, m=5, att_length_km=1e9, p_loop=1.0)
    return config, GkpCode(math.inf)


@pytest.fixture
def long_chain():
    """1000 km over 100 segments with p_link = p_loop = 0.99."""
    return RepeaterConfig(length_km=1000.0, n=100)
