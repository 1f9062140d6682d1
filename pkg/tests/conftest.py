import numpy as np
import pytest

G = 9.81


def steady_partner(h_l, h_r, q, g=G):
    """Bed jump z_R - z_L making (h_l, q) and (h_r, q) share a Bernoulli value."""
    return (q * q / (2 * h_l**2) + g * h_l - q * q / (2 * h_r**2) - g * h_r) / g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
