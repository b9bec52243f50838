"""Empirical ground truth for the range finder: literal RRF sampling, a fast
diagonal path, spectrum generators, power-iteration spectrum mapping, RSVD
spectrum estimation, and empirical quantiles.

The diagonal fast path exploits rotational invariance: the distribution of the
largest principal angle depends on the matrix only through its singular
values, so sampling reduces to sketching a diagonal matrix and measuring the
angle between the span of the sketch and the leading coordinate axes.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .cdf import Spectrum
from .numerics import DEFAULT_REL_TOL, RngStream, _generator, largest_canonical_angle

_CHUNK = 512


@dataclass(frozen=True)
class SpectrumRecipe:
    """Deterministic singular-value generator.

    kind: power (j^-alpha), exponential (base^-j), rank_deficient_linear
    (j^-1 for j <= cutoff, then zeros), or explicit.
    """

    kind: str
    N: int
    k: int
    p: int
    alpha: float = 2.0
    base: float = 2.0
    cutoff: int = 0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("power", "exponential", "rank_deficient_linear", "explicit"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be positive")


def make_spectrum(recipe: SpectrumRecipe) -> Spectrum:
    """Generate the singular values described by a recipe."""
    j = np.arange(1, recipe.N + 1, dtype=float)
    if recipe.kind == "power":
        sigma = j ** (-recipe.alpha)
    elif recipe.kind == "exponential":
        sigma = float(recipe.base) ** (-j)
    elif recipe.kind == "rank_deficient_linear":
        sigma = np.where(j <= recipe.cutoff, 1.0 / j, 0.0)
    else:
        sigma = np.asarray(recipe.values, dtype=float)
        if sigma.size != recipe.N:
            raise ValueError("explicit values must have length N")
        if np.any(np.diff(sigma) > 0):
            raise ValueError("explicit values must be weakly decreasing")
    return Spectrum(sigma=tuple(sigma), k=recipe.k, p=recipe.p)


@dataclass(frozen=True)
class SampleBatch:
    """Monte Carlo samples of sin(theta_1) with full provenance."""

    sin_theta1: tuple[float, ...]
    spectrum: Spectrum
    seed: int
    stream_ids: tuple[int, ...] = ()
    recipe: SpectrumRecipe | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.sin_theta1)

    def sorted(self) -> np.ndarray:
        return np.sort(np.asarray(self.sin_theta1))


def _rrf_chunk(sig: np.ndarray, k: int, p: int, b: int, g) -> np.ndarray:
    omega = g.standard_normal((b, sig.size, k + p))
    q, _ = np.linalg.qr(sig[None, :, None] * omega)
    # cosines of the k nontrivial canonical angles with the leading axes
    sv = np.linalg.svd(q[:, :k, :], compute_uv=False)
    smin = np.clip(sv[:, -1], 0.0, 1.0)
    return np.sqrt(np.clip(1.0 - smin**2, 0.0, 1.0))


def rrf_sample_batch(spec: Spectrum, n_samples: int, rng, workers: int = 1) -> np.ndarray:
    """n_samples independent draws of sin(theta_1) for a diagonal matrix.

    Draws are chunked over substreams so the result is byte-identical no
    matter how many workers process the chunks.
    """
    if spec.k < 1:
        raise ValueError("k must be at least 1")
    N, k, p, r = spec.N, spec.k, spec.p, spec.r
    if r <= k + p:
        return np.zeros(n_samples)
    sig = spec.array()
    out = np.empty(n_samples)
    base = rng if isinstance(rng, RngStream) else None
    gen = None if base is not None else _generator(rng)
    starts = list(range(0, n_samples, _CHUNK))

    def run(chunk_index: int) -> np.ndarray:
        start = starts[chunk_index]
        b = min(_CHUNK, n_samples - start)
        g = base.substream(chunk_index).generator() if base is not None else gen
        return _rrf_chunk(sig, k, p, b, g)

    if workers > 1 and base is not None and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(starts))))
    else:
        results = [run(c) for c in range(len(starts))]
    for start, vals in zip(starts, results):
        out[start : start + vals.size] = vals
    return out


def rrf_sample_diag(spec: Spectrum, rng) -> float:
    """One draw of sin(theta_1) for a diagonal matrix with the given spectrum."""
    return float(rrf_sample_batch(spec, 1, rng)[0])


def _orthonormal_range(Y: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of Y, rank-revealing."""
    u, s, _ = np.linalg.svd(Y, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0]
    return u[:, s > rel_tol * s[0]]


def rrf_sample_full(A: np.ndarray, k: int, p: int, rng) -> float:
    """One draw of sin(theta_1) from the literal randomized range finder.

    Sketches A with an n-by-(k+p) Gaussian matrix, orthonormalizes the sketch,
    and measures the largest nontrivial canonical angle to the leading k left
    singular vectors of A.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    if k + p > min(m, n):
        raise ValueError("k + p must not exceed min(m, n)")
    if k < 1:
        raise ValueError("k must be at least 1")
    gen = _generator(rng)
    Y = A @ gen.standard_normal((n, k + p))
    basis = _orthonormal_range(Y)
    if basis.shape[1] == 0:
        return 0.0
    u, _, _ = np.linalg.svd(A, full_matrices=False)
    u1 = u[:, :k]
    if basis.shape[1] < k:
        # the sketch captured the whole (rank-deficient) range
        if np.linalg.matrix_rank(A) <= basis.shape[1]:
            return 0.0
    theta = largest_canonical_angle(u1, basis)
    return float(np.sin(theta))


def rsi_spectrum(spec: Spectrum, q: int) -> Spectrum:
    """Spectrum of the subspace-iteration matrix (A^T A)^q A: each singular
    value raised to the power 2q+1, with k and p unchanged."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    return Spectrum(
        sigma=tuple(s ** (2 * q + 1) for s in spec.sigma), k=spec.k, p=spec.p
    )


def rsvd_estimate_spectrum(A: np.ndarray, k: int, p: int, q: int = 0, rng=RngStream(0)) -> Spectrum:
    """Singular values estimated by the randomized SVD, padded to a full spectrum.

    Runs sketch / orthonormalize / project / small SVD with q optional power
    iterations, then pads every singular value beyond position k+p with the
    (k+p)-th estimate so the result can be fed to the CDF machinery.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if k + p > min(m, n):
        raise ValueError("k + p must not exceed min(m, n)")
    gen = _generator(rng)
    Y = A @ gen.standard_normal((n, k + p))
    Q, _ = np.linalg.qr(Y)
    for _ in range(q):
        Z, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Z)
    s_hat = np.linalg.svd(Q.T @ A, compute_uv=False)
    sigma = np.concatenate([s_hat, np.full(m - (k + p), s_hat[-1])])
    return Spectrum(sigma=tuple(sigma), k=k, p=p)


def empirical_quantile(samples, q: float) -> float:
    """Lower order-statistic quantile: the ceil(q*n)-th smallest sample."""
    if not (0 < q < 1):
        raise ValueError("q must lie in (0, 1)")
    if isinstance(samples, SampleBatch):
        values = samples.sorted()
    else:
        values = np.sort(np.asarray(samples, dtype=float))
    n = values.size
    if n == 0:
        raise ValueError("empty sample batch")
    idx = int(np.ceil(q * n)) - 1
    return float(values[max(idx, 0)])


def sample_batch(
    spec: Spectrum,
    n_samples: int,
    seed: int,
    stream_id: int = 0,
    recipe: SpectrumRecipe | None = None,
    workers: int = 1,
) -> SampleBatch:
    """Draw a SampleBatch with provenance (seed and per-chunk stream ids)."""
    rng = RngStream(seed, stream_id)
    values = rrf_sample_batch(spec, n_samples, rng, workers=workers)
    n_chunks = (n_samples + _CHUNK - 1) // _CHUNK
    stream_ids = tuple(
        stream_id + c for c in range(n_chunks) for _ in range(min(_CHUNK, n_samples - c * _CHUNK))
    )
    return SampleBatch(
        sin_theta1=tuple(float(v) for v in values),
        spectrum=spec,
        seed=seed,
        stream_ids=stream_ids,
        recipe=recipe,
    )


def save_batch(batch: SampleBatch, csv_path: str) -> None:
    """Persist a batch as CSV (stream_id,sin_theta1) plus a JSON sidecar with
    the generating configuration."""
    from . import __version__

    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["stream_id", "sin_theta1"])
        ids = batch.stream_ids or tuple(0 for _ in batch.sin_theta1)
        for sid, v in zip(ids, batch.sin_theta1):
            writer.writerow([sid, repr(v)])
    sidecar = {
        "seed": batch.seed,
        "k": batch.spectrum.k,
        "p": batch.spectrum.p,
        "sigma": list(batch.spectrum.sigma),
        "recipe": None
        if batch.recipe is None
        else {
            "kind": batch.recipe.kind,
            "N": batch.recipe.N,
            "k": batch.recipe.k,
            "p": batch.recipe.p,
            "alpha": batch.recipe.alpha,
            "base": batch.recipe.base,
            "cutoff": batch.recipe.cutoff,
            "values": list(batch.recipe.values),
        },
        "version": __version__,
    }
    with open(csv_path + ".json", "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def load_batch(csv_path: str) -> SampleBatch:
    """Load a batch written by save_batch."""
    with open(csv_path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["stream_id", "sin_theta1"]:
        raise ValueError("not a sample batch CSV")
    ids = tuple(int(r[0]) for r in rows[1:])
    values = tuple(float(r[1]) for r in rows[1:])
    with open(csv_path + ".json") as f:
        sidecar = json.load(f)
    spec = Spectrum(sigma=tuple(sidecar["sigma"]), k=sidecar["k"], p=sidecar["p"])
    recipe = None
    if sidecar.get("recipe"):
        r = sidecar["recipe"]
        recipe = SpectrumRecipe(
            kind=r["kind"],
            N=r["N"],
            k=r["k"],
            p=r["p"],
            alpha=r["alpha"],
            base=r["base"],
            cutoff=r["cutoff"],
            values=tuple(r["values"]),
        )
    return SampleBatch(
        sin_theta1=values,
        spectrum=spec,
        seed=sidecar["seed"],
        stream_ids=ids,
        recipe=recipe,
    )
