"""Truncated spectral initialization for phase retrieval."""

from dataclasses import dataclass

import numpy as np

from .core import RngStream, gaussian_vector


@dataclass
class InitConfig:
    rng: RngStream
    alpha_y: float = 3.0
    power_iterations: int = 50

    def __post_init__(self):
        if self.alpha_y <= 0:
            raise ValueError("alpha_y must be positive")
        if self.power_iterations < 1:
            raise ValueError("power_iterations must be >= 1")


def init_keep_mask(mset, alpha_y):
    """Measurements kept by the spectral truncation: y_i <= alpha_y^2 * mean(y)."""
    return mset.y <= (alpha_y ** 2) * mset.mean_y


def truncated_spectral_init(model, mset, cfg):
    """Leading eigenvector of the truncated data matrix, scaled to sqrt(mean(y)).

    The matrix is Y = (1/m) sum_i y_i a_i a_i^* over the kept measurements
    only; dropping the largest intensities stops heavy-tailed |<a_i, x>|^2
    samples from wrecking the spectral estimate at moderate m/n. Y is never
    formed: power iteration needs only products Y v, which the sensing model
    supplies via inner_products/adjoint (O(mn) for Gaussian rows,
    O(m log n) for coded diffraction patterns).

    Returns the initial iterate z0 with ||z0|| = sqrt(mean(y)), which
    estimates ||x|| because E y = ||x||^2 under both sensing models.
    """
    if mset.m != model.m:
        raise ValueError(f"measurement count {mset.m} != model m {model.m}")
    if mset.mean_y <= 0:
        raise ValueError("mean measurement must be positive to scale the init")
    keep = init_keep_mask(mset, cfg.alpha_y)
    if not np.any(keep):
        raise ValueError("truncation removed every measurement; alpha_y too small")

    weights = np.where(keep, mset.y, 0.0)
    v = gaussian_vector(cfg.rng, model.n, model.field)
    v = v / np.linalg.norm(v)
    for _ in range(cfg.power_iterations):
        w = model.adjoint(weights * model.inner_products(v)) / model.m
        nw = np.linalg.norm(w)
        if nw == 0 or not np.isfinite(nw):
            raise ValueError("power iteration collapsed; data matrix is degenerate")
        v = w / nw
    return np.sqrt(mset.mean_y) * v
