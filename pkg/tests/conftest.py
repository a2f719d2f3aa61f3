import numpy as np
import pytest

from otfwi import Trace


def random_signed_signal(rng, nt=800, length=2.0, n_bumps=6):
    """Compactly supported signed signal: a few Gaussian bumps, unit sup norm."""
    t = np.linspace(0.0, length, nt)
    f = np.zeros(nt)
    for _ in range(n_bumps):
        amp = rng.uniform(-1.0, 1.0)
        center = rng.uniform(0.15 * length, 0.85 * length)
        width = rng.uniform(0.01 * length, 0.06 * length)
        f += amp * np.exp(-((t - center) / width) ** 2)
    peak = np.max(np.abs(f))
    if peak > 0:
        f = f / peak
    return Trace(f, t[1] - t[0])


@pytest.fixture
def rng():
    return np.random.default_rng(0)
