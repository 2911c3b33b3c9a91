import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_spd_parts(rng, n, k, complex_field=False, shift=0.1):
    """K well-conditioned SPD/HPD matrices, not necessarily summing to I."""
    b = rng.standard_normal((k, n, n))
    if complex_field:
        b = b + 1j * rng.standard_normal((k, n, n))
    a = b @ np.conj(np.swapaxes(b, -1, -2)) + shift * np.eye(n)
    # normalize spectra to O(1)
    return a / np.abs(np.linalg.eigvalsh(a)).max()


def random_sym(rng, n, complex_field=False):
    a = rng.standard_normal((n, n))
    if complex_field:
        a = a + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + np.conj(a.T))
