"""Error and noise-level metrics."""

import numpy as np

from .core import as_signal, check_pair, dist


def relative_rmse(z, x):
    """Phase-invariant relative error dist(z, x) / ||x||. Truth x must be nonzero."""
    z, x, _ = check_pair(z, x)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("ground truth must be nonzero")
    return dist(z, x) / float(nx)


def empirical_snr(model, x, eta):
    """Measurement SNR: sum_i |<a_i, x>|^4 over the noise energy sum_i eta_i^2."""
    x = as_signal(x, model.field)
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != (model.m,):
        raise ValueError("noise vector must have one entry per measurement")
    denom = float(np.sum(eta ** 2))
    if denom == 0:
        raise ValueError("noise is identically zero; SNR undefined")
    c = model.inner_products(x)
    signal = float(np.sum(np.abs(c) ** 4))
    return signal / denom
