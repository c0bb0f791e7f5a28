"""Truncated spectral initialization against a dense eigensolver oracle."""

import numpy as np
import pytest

from twflow.core import COMPLEX, REAL, RngStream
from twflow.sensing import GaussianSensing, MeasurementSet, measure_noiseless
from twflow.spectral import InitConfig, init_keep_mask, truncated_spectral_init


def dense_truncated_matrix(model, mset, alpha_y):
    """Oracle: materialize Y = (1/m) sum y_i a_i a_i^* over kept samples."""
    keep = mset.y <= alpha_y ** 2 * mset.mean_y
    a = model.vectors
    y = np.where(keep, mset.y, 0.0)
    return (a.T * y) @ a.conj() / model.m


def top_eigvec(mat):
    vals, vecs = np.linalg.eigh(mat)
    return vecs[:, -1]


def make_instance(seed, n, m, field=REAL):
    rng = RngStream(seed)
    x = rng.substream(0).gaussian_vector(n, field)
    x /= np.linalg.norm(x)
    model = GaussianSensing.draw(rng.substream(1), m, n, field)
    return x, model, measure_noiseless(model, x), rng.substream(2)


def cosine(u, v):
    return abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))


def test_rank_one_instance_recovers_truth_direction():
    model = GaussianSensing(np.array([[1.0, 0.0]]))
    mset = measure_noiseless(model, np.array([1.0, 0.0]))
    z0 = truncated_spectral_init(model, mset, InitConfig(RngStream(0)))
    assert abs(abs(z0[0]) - 1.0) <= 1e-12
    assert abs(z0[1]) <= 1e-12


@pytest.mark.parametrize("field", [REAL, COMPLEX])
def test_matches_dense_eigensolver(field):
    for seed in range(5):
        x, model, mset, rng = make_instance(30 + seed, 6, 60, field)
        cfg = InitConfig(rng, power_iterations=500)
        z0 = truncated_spectral_init(model, mset, cfg)
        v_oracle = top_eigvec(dense_truncated_matrix(model, mset, cfg.alpha_y))
        assert cosine(z0, v_oracle) >= 1 - 1e-8


def test_output_norm_is_sqrt_mean_y():
    x, model, mset, rng = make_instance(77, 10, 120)
    z0 = truncated_spectral_init(model, mset, InitConfig(rng, power_iterations=20))
    assert abs(np.linalg.norm(z0) - np.sqrt(mset.mean_y)) <= 1e-12 * np.sqrt(mset.mean_y)


def test_more_power_iterations_never_lose_alignment():
    x, model, mset, rng = make_instance(78, 6, 60)
    v_oracle = top_eigvec(dense_truncated_matrix(model, mset, 3.0))
    sines = []
    for iters in (5, 50, 500):
        cfg = InitConfig(RngStream(78, 99), power_iterations=iters)
        z0 = truncated_spectral_init(model, mset, cfg)
        sines.append(np.sqrt(max(0.0, 1 - cosine(z0, v_oracle) ** 2)))
    assert sines[1] <= sines[0] + 1e-10
    assert sines[2] <= sines[1] + 1e-10


def test_init_quality_at_moderate_oversampling():
    hits = 0
    for seed in range(100):
        x, model, mset, rng = make_instance(500 + seed, 8, 400)
        z0 = truncated_spectral_init(model, mset, InitConfig(rng, power_iterations=50))
        err = min(np.linalg.norm(z0 - x), np.linalg.norm(z0 + x))
        hits += err <= 0.5 * np.linalg.norm(x)
    assert hits >= 95


def test_keep_mask_boundary_inclusive():
    # with mean_y = 1 and the default alpha_y = 3 the threshold is exactly 9
    y = np.array([9.0, 1.0, np.nextafter(9.0, np.inf)])
    mset = MeasurementSet(y=y, mean_y=1.0, kind="noiseless")
    mask = init_keep_mask(mset, 3.0)
    assert mask.tolist() == [True, True, False]


def test_degenerate_inputs_raise():
    model = GaussianSensing(np.eye(3))
    zero = measure_noiseless(model, np.zeros(3))
    with pytest.raises(ValueError):
        truncated_spectral_init(model, zero, InitConfig(RngStream(1)))
    # alpha_y so small every sample is truncated
    x = np.array([1.0, 2.0, 3.0])
    mset = measure_noiseless(model, x)
    with pytest.raises(ValueError):
        truncated_spectral_init(model, mset, InitConfig(RngStream(1), alpha_y=1e-6))
    with pytest.raises(ValueError):
        InitConfig(RngStream(1), power_iterations=0)
    with pytest.raises(ValueError):
        InitConfig(RngStream(1), alpha_y=-1.0)
