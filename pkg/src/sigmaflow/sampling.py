"""Random spectra used by the property sweeps."""

import numpy as np


def log_uniform_spectra(n, size, rng, low=1e-2, high=1e2):
    """``size`` spectra in the positive cone, entries log-uniform in ``[low, high]``."""
    return np.exp(rng.uniform(np.log(low), np.log(high), size=(size, n)))


def pinched_spectra(n, ratio, size, rng):
    """Spectra with ``max = 1`` and the other entries uniform in ``[ratio, 1]``.

    Every sample satisfies ``min >= ratio * max``; the position of the
    maximal entry is shuffled so index-dependent code is exercised evenly.
    """
    lam = rng.uniform(ratio, 1.0, size=(size, n))
    lam[:, 0] = 1.0
    return rng.permuted(lam, axis=1)


def umbilic(n, value=1.0):
    return np.full(n, float(value))
