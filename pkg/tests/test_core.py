"""Phase-invariant distance, alignment, RNG stream contracts."""

import numpy as np
import pytest

from twflow.core import (COMPLEX, REAL, RngStream, align_phase, as_signal,
                         dist, gaussian_vector)


def grid_dist(z, x, points=10 ** 6):
    """Independent oracle: brute-force the phase minimization over a grid."""
    thetas = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    best = np.inf
    # chunked so the n=1..2 cases stay cheap in memory
    for chunk in np.array_split(thetas, 100):
        d = np.linalg.norm(np.exp(-1j * chunk)[:, None] * z[None, :]
                           - x[None, :], axis=1)
        best = min(best, d.min())
    return best


def test_dist_identity_and_sign_flip():
    x = np.array([1.0, -2.0, 0.5])
    assert dist(x, x) == 0.0
    assert dist(-x, x) == 0.0


def test_dist_complex_examples_vs_grid_oracle():
    z = np.array([1j])
    x = np.array([1.0 + 0j])
    assert dist(z, x) <= 1e-12
    assert abs(dist(z, x) - grid_dist(z, x)) <= 1e-6

    z2 = np.array([1.0 + 0j, 0j])
    x2 = np.array([0j, 1.0 + 0j])
    assert abs(dist(z2, x2) - np.sqrt(2)) <= 1e-12
    assert abs(dist(z2, x2) - grid_dist(z2, x2)) <= 1e-6


def test_dist_random_pairs_match_grid_oracle():
    rng = RngStream(101)
    for k in range(5):
        sub = rng.substream(k)
        z = sub.gaussian_vector(2, COMPLEX)
        x = sub.gaussian_vector(2, COMPLEX)
        assert abs(dist(z, x) - grid_dist(z, x)) <= 1e-5 * max(1.0, dist(z, x))


def test_dist_symmetry_and_unit_scaling():
    rng = RngStream(7)
    z = rng.gaussian_vector(12, COMPLEX)
    x = rng.gaussian_vector(12, COMPLEX)
    assert abs(dist(z, x) - dist(x, z)) <= 1e-12
    c = np.exp(0.7j)
    assert abs(dist(c * z, c * x) - dist(z, x)) <= 1e-12
    assert dist(z, x) <= np.linalg.norm(z - x) + 1e-15


def test_dist_phase_invariance_over_theta_grid():
    rng = RngStream(8)
    z = rng.gaussian_vector(16, COMPLEX)
    x = rng.gaussian_vector(16, COMPLEX)
    base = dist(z, x)
    for theta in np.linspace(0, 2 * np.pi, 100):
        assert abs(dist(np.exp(1j * theta) * z, x) - base) <= 1e-12


def test_dist_orthogonal_degenerate_case():
    z = np.array([1.0 + 0j, 0j])
    x = np.array([0j, 2.0 + 0j])
    # <x, z> = 0: every phase ties, sqrt(1 + 4) is the common value
    assert abs(dist(z, x) - np.sqrt(5.0)) <= 1e-12


def test_dist_rejects_mismatches():
    with pytest.raises(ValueError):
        dist(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        dist(np.ones((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        as_signal(np.array([1j, 2j]), REAL)


def test_align_phase_real_sign_and_complex_rotation():
    x = np.array([1.0, 2.0, -1.0])
    assert np.array_equal(align_phase(-x, x), x)
    xc = np.array([1.0 + 2j, -0.5j])
    out = align_phase(1j * xc, xc)
    assert np.linalg.norm(out - xc) <= 1e-12


def test_align_phase_attains_dist_and_is_idempotent():
    rng = RngStream(9)
    z = rng.gaussian_vector(20, COMPLEX)
    x = rng.gaussian_vector(20, COMPLEX)
    aligned = align_phase(z, x)
    assert abs(np.linalg.norm(aligned - x) - dist(z, x)) <= 1e-12
    again = align_phase(aligned, x)
    assert np.linalg.norm(again - aligned) <= 1e-12


def test_align_phase_orthogonal_returns_unchanged():
    z = np.array([1.0 + 0j, 0j])
    x = np.array([0j, 1.0 + 0j])
    assert np.array_equal(align_phase(z, x), z)


def test_gaussian_vector_moments_real():
    v = gaussian_vector(RngStream(11), 10 ** 5, REAL)
    assert -0.02 < v.mean() < 0.02
    assert 0.98 < v.var() < 1.02


def test_gaussian_vector_moments_complex():
    v = gaussian_vector(RngStream(12), 10 ** 5, COMPLEX)
    assert 0.98 < np.mean(np.abs(v) ** 2) < 1.02


def test_rng_stream_determinism_and_substreams():
    a = RngStream(5, 3).gaussian_vector(32)
    b = RngStream(5, 3).gaussian_vector(32)
    assert np.array_equal(a, b)

    s1 = RngStream(5).substream(1)
    s2 = RngStream(5).substream(2)
    assert s1.stream_id != s2.stream_id
    assert not np.array_equal(s1.gaussian_vector(32), s2.gaussian_vector(32))

    # substream derivation is stateless: deriving after draws changes nothing
    parent = RngStream(5)
    parent.gaussian_vector(16)
    assert parent.substream(1).stream_id == RngStream(5).substream(1).stream_id


def test_rng_stream_rejects_bad_sizes():
    with pytest.raises(ValueError):
        RngStream(0).gaussian_vector(0)
    with pytest.raises(ValueError):
        RngStream(0).gaussian_vector(4, "quaternion")
