"""Random-stream plumbing and dense-matrix primitives."""

import numpy as np
import pytest
from scipy import stats

from rangefinder.numerics import (
    RngStream,
    gaussian_matrix,
    haar_stiefel,
    haar_stiefel_batch,
    largest_canonical_angle,
    perp_projector,
    principal_angles,
    pseudodet,
    pseudoinverse,
)


def test_rng_stream_reproducible():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    assert np.array_equal(a, b)


def test_rng_stream_distinct_streams_differ():
    a = RngStream(7, 0).generator().standard_normal(5)
    b = RngStream(7, 1).generator().standard_normal(5)
    c = RngStream(8, 0).generator().standard_normal(5)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_substream_offsets():
    assert RngStream(5, 2).substream(7) == RngStream(5, 9)


def test_gaussian_matrix_shape_and_moments():
    g = gaussian_matrix(2000, 3, RngStream(0))
    assert g.shape == (2000, 3)
    assert abs(g.mean()) < 0.05
    assert abs(g.std() - 1.0) < 0.05


def test_haar_stiefel_orthonormal():
    q = haar_stiefel(10, 4, RngStream(1))
    assert np.allclose(q.T @ q, np.eye(4), atol=1e-12)


def test_haar_stiefel_batch_matches_contract():
    q = haar_stiefel_batch(64, 8, 3, RngStream(2))
    assert q.shape == (64, 8, 3)
    prods = np.einsum("bij,bik->bjk", q, q)
    assert np.allclose(prods, np.eye(3)[None], atol=1e-12)


def test_haar_entries_unbiased():
    # sign-corrected QR gives mean-zero entries; plain QR biases the diagonal
    q = haar_stiefel_batch(40_000, 6, 2, RngStream(3))
    d = q[:, 0, 0]
    z = d.mean() / (d.std(ddof=1) / np.sqrt(d.size))
    assert abs(z) < 4.0


def test_haar_first_column_uniform_on_sphere():
    # squared first coordinate of a uniform direction in R^n is Beta(1/2,(n-1)/2)
    n = 5
    q = haar_stiefel_batch(20_000, n, 1, RngStream(4))
    u = q[:, 0, 0] ** 2
    ks = stats.kstest(u, stats.beta(0.5, (n - 1) / 2.0).cdf).statistic
    assert ks < 0.02


def test_principal_angles_identical_subspaces():
    x = haar_stiefel(9, 3, RngStream(5))
    assert np.allclose(principal_angles(x, x), 0.0, atol=1e-7)


def test_principal_angles_known_rotation():
    theta = 0.3
    x = np.array([[1.0], [0.0]])
    y = np.array([[np.cos(theta)], [np.sin(theta)]])
    assert principal_angles(x, y)[0] == pytest.approx(theta, abs=1e-12)


def test_principal_angles_dimension_mismatch_pads_right_angles():
    x = np.eye(4)[:, :3]
    y = np.eye(4)[:, :1]
    angles = principal_angles(x, y)
    assert angles.shape == (3,)
    assert angles[0] == pytest.approx(np.pi / 2)
    assert angles[-1] == pytest.approx(0.0)


def test_largest_canonical_angle_ignores_forced_right_angles():
    x = np.eye(4)[:, :3]
    y = np.eye(4)[:, :1]
    assert largest_canonical_angle(x, y) == pytest.approx(0.0)


def test_pseudoinverse_moore_penrose():
    m = gaussian_matrix(6, 4, RngStream(6))
    m[:, 3] = m[:, 0]  # rank 3
    mp = pseudoinverse(m)
    assert np.allclose(m @ mp @ m, m, atol=1e-10)
    assert np.allclose(mp @ m @ mp, mp, atol=1e-10)
    assert np.allclose((m @ mp).T, m @ mp, atol=1e-10)
    assert np.allclose((mp @ m).T, mp @ m, atol=1e-10)


def test_pseudodet_drops_null_directions():
    d = np.diag([3.0, 2.0, 0.0])
    assert pseudodet(d) == pytest.approx(6.0)
    assert pseudodet(np.zeros((2, 2))) == 1.0


def test_pseudodet_rejects_asymmetric():
    with pytest.raises(ValueError):
        pseudodet(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_perp_projector_trivial_when_full_rank():
    q1 = haar_stiefel(5, 2, RngStream(7))
    g = np.eye(5)
    assert np.allclose(perp_projector(q1, g), np.eye(2))


def test_perp_projector_annihilates_mapped_null_space():
    # G has a one-dimensional null space; the projector must kill Q1^T null(G)
    rng = RngStream(8)
    q1 = haar_stiefel(5, 2, rng)
    v = haar_stiefel(5, 4, RngStream(9))
    g = v @ v.T  # rank 4 PSD
    P = perp_projector(q1, g)
    null = np.linalg.eigh(g)[1][:, :1]
    mapped = q1.T @ null
    assert np.linalg.norm(P @ mapped) < 1e-8
    assert np.allclose(P @ P, P, atol=1e-10)
