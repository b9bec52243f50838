"""Dense-matrix primitives: Gaussian sampling, Haar Stiefel frames, principal
angles, pseudoinverse, pseudodeterminant, and null-space projectors."""

from dataclasses import dataclass

import numpy as np

DEFAULT_REL_TOL = 1e-10


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, stream_id).

    Identical (seed, stream_id) pairs reproduce identical draws regardless of
    how work is split across workers, so Monte Carlo results are reproducible
    independent of parallel scheduling.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    def substream(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + offset)


def _generator(rng) -> np.random.Generator:
    """Accept either an RngStream or an already-constructed numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def gaussian_matrix(m: int, n: int, rng) -> np.ndarray:
    """m-by-n matrix of i.i.d. standard normal entries."""
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    return _generator(rng).standard_normal((m, n))


def haar_stiefel(n: int, k: int, rng) -> np.ndarray:
    """Draw an n-by-k frame uniformly from the Stiefel manifold V_{n,k}.

    Uses the QR decomposition of a Gaussian matrix with the signs of the
    diagonal of R forced positive. Plain QR is *not* Haar distributed; the
    sign correction is required for exact uniformity.
    """
    if k > n:
        raise ValueError("frame dimension k must not exceed ambient dimension n")
    gen = _generator(rng)
    for _ in range(100):
        g = gen.standard_normal((n, k))
        q, r = np.linalg.qr(g)
        d = np.diagonal(r)
        if np.min(np.abs(d)) > 1e-300:
            return q * np.sign(d)
    raise RuntimeError("failed to draw a numerically full-rank Gaussian matrix")


def haar_stiefel_batch(b: int, n: int, k: int, rng) -> np.ndarray:
    """b independent Haar frames, stacked into shape (b, n, k)."""
    gen = _generator(rng)
    g = gen.standard_normal((b, n, k))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    s = np.sign(d)
    s[s == 0] = 1.0
    return q * s[:, None, :]


def principal_angles(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Principal angles between the column spaces of two orthonormal frames.

    Returns the angles theta_1 >= ... >= theta_{max(k,l)} in [0, pi/2], with
    cos(theta_j) given by the singular values of X^T Y (padded with zeros when
    the frames have unequal dimension). Cosines are clamped into [0, 1] to
    avoid NaN from roundoff slightly above 1.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("frames must share their ambient dimension")
    cos = np.linalg.svd(X.T @ Y, compute_uv=False)
    width = max(X.shape[1], Y.shape[1])
    if cos.size < width:
        cos = np.concatenate([cos, np.zeros(width - cos.size)])
    cos = np.clip(cos, 0.0, 1.0)
    # smallest cosine first = largest angle first
    return np.arccos(cos[::-1])


def largest_canonical_angle(X: np.ndarray, Y: np.ndarray) -> float:
    """Largest of the min(k, l) canonical angles between two frames.

    For frames of unequal dimension this is the largest angle that is not
    forced to pi/2 by the dimension mismatch, i.e. arccos of the smallest
    singular value of X^T Y.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("frames must share their ambient dimension")
    cos = np.linalg.svd(X.T @ Y, compute_uv=False)
    return float(np.arccos(np.clip(cos[-1], 0.0, 1.0)))


def pseudoinverse(M: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """SVD-based Moore-Penrose pseudoinverse.

    Singular values below rel_tol times the largest are treated as zero.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    M = np.asarray(M, dtype=float)
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    keep = s > rel_tol * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T


def pseudodet(M: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Product of the nonzero eigenvalues of a symmetric PSD matrix.

    Eigenvalues at or below rel_tol times the largest are skipped; a matrix of
    rank zero yields 1 by convention.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(M - M.T)) > 1e-8 * max(1.0, np.max(np.abs(M))):
        raise ValueError("matrix must be symmetric")
    w = np.linalg.eigvalsh(M)
    wmax = w[-1] if w.size else 0.0
    if wmax <= 0.0:
        if w.size and w[0] < -1e-8:
            raise ValueError("matrix must be positive semidefinite")
        return 1.0
    if w[0] < -1e-8 * wmax:
        raise ValueError("matrix must be positive semidefinite")
    keep = w > rel_tol * wmax
    if not np.any(keep):
        return 1.0
    return float(np.prod(w[keep]))


def perp_projector(Q1: np.ndarray, G: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Projector onto the orthogonal complement of Q1^T Null(G).

    Q1 is a (k+p)-by-k frame and G is a (k+p)-by-(k+p) symmetric PSD matrix.
    Eigenvalues of G at or below rel_tol times its largest define the null
    space. Returns the identity when the null space is trivial.
    """
    Q1 = np.asarray(Q1, dtype=float)
    G = np.asarray(G, dtype=float)
    k = Q1.shape[1]
    w, v = np.linalg.eigh(G)
    wmax = max(w[-1], 0.0) if w.size else 0.0
    null = v[:, w <= rel_tol * wmax]
    if null.shape[1] == 0:
        return np.eye(k)
    W = Q1.T @ null
    u, s, _ = np.linalg.svd(W, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(k)
    basis = u[:, s > rel_tol * s[0]]
    return np.eye(k) - basis @ basis.T
