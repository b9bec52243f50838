"""Empirical sampling harness: recipes, RRF draws, persistence, quantiles."""

import numpy as np
import pytest
from scipy import stats

from rangefinder.cdf import Spectrum, cdf
from rangefinder.harness import (
    SampleBatch,
    SpectrumRecipe,
    empirical_quantile,
    load_batch,
    make_spectrum,
    rrf_sample_batch,
    rrf_sample_diag,
    rrf_sample_full,
    rsi_spectrum,
    rsvd_estimate_spectrum,
    sample_batch,
    save_batch,
)
from rangefinder.numerics import RngStream


def test_make_spectrum_power():
    spec = make_spectrum(SpectrumRecipe(kind="power", N=5, k=2, p=1, alpha=2.0))
    assert spec.sigma == pytest.approx((1.0, 0.25, 1 / 9, 1 / 16, 1 / 25))


def test_make_spectrum_exponential():
    spec = make_spectrum(SpectrumRecipe(kind="exponential", N=4, k=1, p=0, base=2.0))
    assert spec.sigma == pytest.approx((0.5, 0.25, 0.125, 0.0625))


def test_make_spectrum_rank_deficient():
    spec = make_spectrum(
        SpectrumRecipe(kind="rank_deficient_linear", N=6, k=2, p=1, cutoff=3)
    )
    assert spec.sigma == pytest.approx((1.0, 0.5, 1 / 3, 0.0, 0.0, 0.0))
    assert spec.r == 3


def test_make_spectrum_explicit_validation():
    with pytest.raises(ValueError):
        make_spectrum(
            SpectrumRecipe(kind="explicit", N=3, k=1, p=0, values=(1.0, 2.0, 0.5))
        )
    with pytest.raises(ValueError):
        make_spectrum(SpectrumRecipe(kind="explicit", N=3, k=1, p=0, values=(1.0,)))
    with pytest.raises(ValueError):
        SpectrumRecipe(kind="nope", N=3, k=1, p=0)


def test_rrf_sample_batch_deterministic():
    spec = make_spectrum(SpectrumRecipe(kind="power", N=30, k=3, p=2, alpha=2.0))
    a = rrf_sample_batch(spec, 700, RngStream(5))
    b = rrf_sample_batch(spec, 700, RngStream(5))
    assert np.array_equal(a, b)


def test_rrf_sample_batch_worker_invariant():
    spec = make_spectrum(SpectrumRecipe(kind="power", N=30, k=3, p=2, alpha=2.0))
    a = rrf_sample_batch(spec, 1500, RngStream(5), workers=1)
    b = rrf_sample_batch(spec, 1500, RngStream(5), workers=4)
    assert np.array_equal(a, b)


def test_rrf_sample_batch_prefix_stable():
    # chunked substreams: the first chunk of a longer run equals a short run
    spec = make_spectrum(SpectrumRecipe(kind="power", N=20, k=2, p=1, alpha=1.5))
    short = rrf_sample_batch(spec, 512, RngStream(6))
    long = rrf_sample_batch(spec, 1024, RngStream(6))
    assert np.array_equal(short, long[:512])


def test_rrf_sample_exact_capture_returns_zeros():
    spec = Spectrum(sigma=(1.0, 0.5, 0.0, 0.0, 0.0), k=1, p=1)
    assert np.all(rrf_sample_batch(spec, 10, RngStream(0)) == 0.0)


def test_rrf_sample_values_in_unit_interval():
    spec = make_spectrum(SpectrumRecipe(kind="power", N=25, k=2, p=2, alpha=2.0))
    vals = rrf_sample_batch(spec, 400, RngStream(1))
    assert np.all((0.0 <= vals) & (vals <= 1.0))


def test_rrf_sample_diag_single_draw():
    spec = make_spectrum(SpectrumRecipe(kind="power", N=20, k=2, p=1, alpha=2.0))
    v = rrf_sample_diag(spec, RngStream(2))
    assert 0.0 <= v <= 1.0


def test_rrf_full_matches_diag_distribution():
    # rotational invariance: the literal range finder on a random matrix with
    # the given singular values matches the diagonal fast path in distribution
    N, k, p = 15, 2, 1
    sigma = np.array([float(j) ** -1.5 for j in range(1, N + 1)])
    gen = np.random.default_rng(3)
    u, _ = np.linalg.qr(gen.standard_normal((N, N)))
    v, _ = np.linalg.qr(gen.standard_normal((N, N)))
    A = (u * sigma) @ v.T
    full = np.array([rrf_sample_full(A, k, p, gen) for _ in range(800)])
    diag = rrf_sample_batch(Spectrum(sigma=tuple(sigma), k=k, p=p), 4000, RngStream(4))
    ks = stats.ks_2samp(full, diag).statistic
    assert ks < 0.06


def test_rrf_full_validation():
    gen = np.random.default_rng(0)
    with pytest.raises(ValueError):
        rrf_sample_full(gen.standard_normal((4, 4)), 3, 2, gen)
    with pytest.raises(ValueError):
        rrf_sample_full(gen.standard_normal(4), 1, 1, gen)


def test_rsi_spectrum_powers():
    spec = Spectrum(sigma=(0.9, 0.5, 0.1), k=1, p=1)
    assert rsi_spectrum(spec, 1).sigma == pytest.approx((0.9**3, 0.5**3, 0.1**3))
    assert rsi_spectrum(spec, 0).sigma == spec.sigma


def test_rsvd_estimate_exact_on_low_rank():
    # an exactly rank-(k+p) matrix is recovered exactly by the sketch
    N, k, p = 12, 2, 1
    sigma = np.array([3.0, 2.0, 1.0] + [0.0] * (N - 3))
    gen = np.random.default_rng(5)
    u, _ = np.linalg.qr(gen.standard_normal((N, N)))
    v, _ = np.linalg.qr(gen.standard_normal((N, N)))
    A = (u * sigma) @ v.T
    est = rsvd_estimate_spectrum(A, k, p, rng=RngStream(6))
    assert np.asarray(est.sigma[: k + p]) == pytest.approx(sigma[: k + p], rel=1e-8)


def test_empirical_quantile_order_statistic():
    samples = np.array([0.4, 0.1, 0.3, 0.2])
    # ceil(0.5*4) = 2nd smallest
    assert empirical_quantile(samples, 0.5) == 0.2
    assert empirical_quantile(samples, 0.95) == 0.4
    assert empirical_quantile(samples, 0.25) == 0.1
    with pytest.raises(ValueError):
        empirical_quantile(samples, 1.0)
    with pytest.raises(ValueError):
        empirical_quantile(np.array([]), 0.5)


def test_sample_batch_and_round_trip(tmp_path):
    recipe = SpectrumRecipe(kind="power", N=15, k=2, p=1, alpha=2.0)
    spec = make_spectrum(recipe)
    batch = sample_batch(spec, 600, seed=9, recipe=recipe)
    assert len(batch) == 600
    path = str(tmp_path / "batch.csv")
    save_batch(batch, path)
    loaded = load_batch(path)
    assert loaded.sin_theta1 == batch.sin_theta1
    assert loaded.spectrum == batch.spectrum
    assert loaded.seed == batch.seed
    assert loaded.recipe == batch.recipe


def test_save_batch_byte_deterministic(tmp_path):
    recipe = SpectrumRecipe(kind="power", N=10, k=1, p=1, alpha=1.0)
    spec = make_spectrum(recipe)
    p1 = str(tmp_path / "a.csv")
    p2 = str(tmp_path / "b.csv")
    save_batch(sample_batch(spec, 100, seed=1, recipe=recipe), p1)
    save_batch(sample_batch(spec, 100, seed=1, recipe=recipe), p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_load_batch_rejects_foreign_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        load_batch(str(path))


def test_sampled_quantile_tracks_cdf():
    # empirical 95th percentile of sin(theta_1) against the inverted CDF value
    spec = make_spectrum(SpectrumRecipe(kind="power", N=40, k=3, p=3, alpha=2.0))
    samples = rrf_sample_batch(spec, 8000, RngStream(7))
    q95 = empirical_quantile(samples, 0.95)
    # CDF at arcsin(q95) should be near 0.95
    val = cdf(spec, float(np.arcsin(q95)), 3000, RngStream(8))
    assert val.value == pytest.approx(0.95, abs=0.02)
