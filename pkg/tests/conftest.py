import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20230817)


@pytest.fixture
def tone():
    """Factory for a unit-amplitude-scalable sine, sampled at fs."""

    def make(freq_hz: float, fs: float, seconds: float, amplitude: float = 0.5):
        n = int(round(seconds * fs))
        t = np.arange(n) / fs
        return amplitude * np.sin(2.0 * math.pi * freq_hz * t)

    return make
