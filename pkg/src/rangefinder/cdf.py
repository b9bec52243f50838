"""Exact CDF of the largest principal angle produced by the Gaussian RRF.

The CDF is the expectation, over a pair of independent uniform Stiefel frames
(Q1, H1), of an integrand applied to the random matrix S_theta. The sampler
draws the frames once and reuses them across every theta (common random
numbers): S_theta's eigenvalues are s_j = t_j / (t_j + cot^2(theta)) for
theta-independent t_j, so one eigendecomposition per draw serves an entire
curve and the estimated CDF is nondecreasing in theta along the shared draws.

The integrand depends on the parity of the oversampling p:

* odd p — the coincident-parameter Gauss series terminates exactly
  (|S|^gamma times a finite zonal sum over partitions with parts at most
  (p-1)/2), evaluated by the series machinery.
* even p, k = 1 — the series representation degenerates, so the equivalent
  pre-reflection form (multivariate gamma prefactor times a convergent scalar
  Gauss function) is used; it is exact and deterministic in s.
* even p, k >= 2 — the pre-reflection form is transformed (Euler, then Pfaff,
  then the Euler integral on the remaining half-integer parameter) into
  prefactor * |S|^gamma * E|I - S(I-Y)|^((p-1)/2) with Y a k-by-k matrix Beta
  ((k+1)/2, gamma) variable. The expectation has a bounded, low-variance
  integrand for every S in (0, I), unlike the zonal series, which converges
  too slowly near the relevant part of the distribution. One Y is drawn per
  Monte Carlo draw and shared across the theta grid.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import hyp2f1

from .hypergeom import SeriesControl, SeriesEvaluator, gamma_prefactor_tilde_cdf, tilde_evaluator
from .numerics import (
    DEFAULT_REL_TOL,
    RngStream,
    _generator,
    haar_stiefel_batch,
    perp_projector,
    pseudoinverse,
)

logger = logging.getLogger(__name__)

EIG_FLOOR = 1e-300
_CHUNK = 512
_BETA_STREAM_OFFSET = 5_000_000
_RESAMPLE_STREAM_OFFSET = 10_000_000


class SingularDraw(Exception):
    """A sampled quadratic form was rank-deficient beyond its structural nullity."""


@dataclass(frozen=True)
class Spectrum:
    """Ordered singular values with target rank k and oversampling p."""

    sigma: tuple[float, ...]
    k: int
    p: int

    def __post_init__(self):
        sigma = tuple(float(s) for s in self.sigma)
        object.__setattr__(self, "sigma", sigma)
        n = len(sigma)
        if any(s < 0 for s in sigma):
            raise ValueError("singular values must be nonnegative")
        if any(a < b for a, b in zip(sigma, sigma[1:])):
            raise ValueError("singular values must be weakly decreasing")
        if not (0 <= self.k <= n):
            raise ValueError("k must satisfy 0 <= k <= N")
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        if self.k + self.p > n:
            raise ValueError("k + p must not exceed N")
        if self.k >= 1 and sigma[self.k - 1] <= 0:
            raise ValueError("sigma_k must be positive (leading block nonsingular)")

    @property
    def N(self) -> int:
        return len(self.sigma)

    @property
    def r(self) -> int:
        return int(sum(1 for s in self.sigma if s > 0))

    def array(self) -> np.ndarray:
        return np.asarray(self.sigma, dtype=float)


@dataclass(frozen=True)
class CdfEstimate:
    theta: float
    value: float
    stderr: float
    n_mc: int
    regime: str  # high_rank | low_rank | exact_capture


def _pfaffian(A: np.ndarray) -> float:
    """Pfaffian of a small antisymmetric matrix by expansion along row one."""
    n = A.shape[0]
    if n % 2 == 1:
        return 0.0
    if n == 0:
        return 1.0
    if n == 2:
        return float(A[0, 1])
    total = 0.0
    for j in range(1, n):
        if A[0, j] == 0.0:
            continue
        sub = np.delete(np.delete(A, (0, j), axis=0), (0, j), axis=1)
        total += (-1.0) ** (j + 1) * A[0, j] * _pfaffian(sub)
    return total


def _ordered_vandermonde_integral(k: int, weight, u_power: int, deg: int) -> float:
    """Integral of prod_i w(y_i) * prod_{i<j} (y_j - y_i) over the ordered
    simplex 0 < y_1 < ... < y_k < 1, with w(y) = weight(y) * (1-y)^(u_power/2
    - 1/2)... evaluated after the substitution y = 1 - u^2 which makes every
    factor analytic: w(1-u^2) dy = -weight(1-u^2) * u^u_power * 2u du.

    Uses the Pfaffian reduction of an ordered determinant integral: the
    integrand is det[phi_j(y_i)] with phi_j(y) = y^(j-1) w(y), and the ordered
    integral equals the Pfaffian of the antisymmetric matrix of pairwise
    integrals (bordered with single integrals when k is odd).
    """
    from numpy.polynomial.chebyshev import Chebyshev

    def g(i):
        # phi_{i+1}(1 - u^2) * 2u, as a function of u on [0, 1]
        def func(u):
            return 2.0 * u**u_power * (1.0 - u * u) ** i * weight(1.0 - u * u)

        return Chebyshev.interpolate(func, deg, domain=[0.0, 1.0])

    chebs = [g(i) for i in range(k)]
    ints = [c.integ() for c in chebs]
    # G_i(b) = integral of g_i over [b, 1] <-> integral of phi_i over [0, y(b)]
    G = [ints[i](1.0) - ints[i] for i in range(k)]
    n = k if k % 2 == 0 else k + 1
    Q = np.zeros((n, n))
    for i in range(k):
        for j in range(i + 1, k):
            prod = chebs[j] * G[i] - chebs[i] * G[j]
            anti = prod.integ()
            Q[i, j] = anti(1.0) - anti(0.0)
            Q[j, i] = -Q[i, j]
    if k % 2 == 1:
        for i in range(k):
            Q[i, k] = ints[i](1.0) - ints[i](0.0)
            Q[k, i] = -Q[i, k]
    return _pfaffian(Q)


def _even_p_equal_eigs_J(N: int, k: int, p: int, s: float) -> float:
    """Deterministic CDF integrand for even p, k >= 2, at S = s*I.

    At equal eigenvalues the matrix Beta expectation reduces to a ratio of
    ordered eigenvalue integrals against the Beta((k+1)/2, (N-k-p)/2)
    eigenvalue density (whose normalization cancels in the ratio):
    E|I - S(I-Y)|^((p-1)/2) = E prod_i (1 - s + s y_i)^((p-1)/2).
    """
    gamma = 0.5 * (N - k - p)
    u_power = N - 2 * k - p  # (1-y)^(gamma - (k+1)/2) after y = 1 - u^2
    half = 0.5 * (p - 1)
    deg = 600 if s < 0.99 else 1500

    def w_num(y):
        return (1.0 - s + s * y) ** half

    num = _ordered_vandermonde_integral(k, w_num, u_power, deg)
    den = _ordered_vandermonde_integral(k, lambda y: np.ones_like(y), u_power, deg)
    pref = gamma_prefactor_tilde_cdf(N, k, p)
    return float(pref * np.exp(gamma * k * np.log(s)) * num / den)


def integrand_J(N: int, k: int, p: int, s_eigs, ctrl: SeriesControl = SeriesControl()) -> float:
    """|S|^((N-k-p)/2) times the coincident-parameter Gauss series at I - S.

    For odd p this is the exact terminating-series CDF integrand. For even p
    it is the term-wise limit of the series (terms with exactly-zero numerator
    shifted factorial dropped), which is the object the scalar lower bound of
    prop_lower_bound speaks about; the CDF itself evaluates even p through an
    equivalent transformed representation instead (see the module docstring).
    Equal eigenvalues take a closed-form fast path that supports much larger
    truncation weights than the general evaluator.
    """
    if N < k + p:
        raise ValueError("N must be at least k + p")
    s = np.asarray(s_eigs, dtype=float)
    if s.size != k:
        raise ValueError("expected k eigenvalues")
    if np.any(s <= 0) or np.any(s > 1 + 1e-12):
        raise ValueError("eigenvalues of S must lie in (0, 1]")
    s = np.clip(s, EIG_FLOOR, 1.0)
    gamma = 0.5 * (N - k - p)
    ev = tilde_evaluator(k, p, gamma, ctrl)
    if np.all(s == s[0]):
        tilde0, _, _ = ev.evaluate_scalar_matrix(1.0 - float(s[0]))
    else:
        tilde, _, _ = ev.evaluate_batch((1.0 - s)[None, :])
        tilde0 = float(tilde[0])
    return float(np.exp(gamma * np.sum(np.log(s))) * tilde0)


def _matrix_beta_batch(b: int, k: int, alpha: float, beta: float, gen) -> np.ndarray:
    """b draws from the k-by-k matrix Beta(alpha, beta) distribution.

    Requires 2*alpha and 2*beta to be positive integers with 2*alpha >= k so
    the Wishart ratio construction is nonsingular.
    """
    n1 = int(round(2 * alpha))
    n2 = int(round(2 * beta))
    G1 = gen.standard_normal((b, k, n1))
    G2 = gen.standard_normal((b, k, n2))
    W1 = G1 @ G1.transpose(0, 2, 1)
    W2 = G2 @ G2.transpose(0, 2, 1)
    L = np.linalg.cholesky(W1 + W2)
    X = np.linalg.solve(L, W1)
    return np.linalg.solve(L, X.transpose(0, 2, 1)).transpose(0, 2, 1)


def _needs_beta_draws(spec: Spectrum) -> bool:
    return spec.p % 2 == 0 and spec.k >= 2 and spec.N >= 2 * spec.k + spec.p


def _draw_t_eigs(spec: Spectrum, n_mc: int, rng, rel_tol: float = DEFAULT_REL_TOL):
    """Theta-independent Monte Carlo inputs: eigenvalues t_j per draw, shape
    (n_mc, k), plus matrix Beta draws for the even-p integrand when needed.

    S_theta = (I + cot^2(theta) * T)^{-1} in a basis where T is symmetric;
    in the high-rank regime T = Sigma1^{-1} M^{-1} Sigma1^{-1} with
    M = Q1^T (H1^T Sigma2^2 H1)^{-1} Q1, and in the low-rank regime M^{-1}
    is replaced by the projected pseudoinverse form.
    """
    N, k, p, r = spec.N, spec.k, spec.p, spec.r
    sig = spec.array()
    sig1 = sig[:k]
    sig2_sq = sig[k:] ** 2
    high_rank = r >= 2 * k + p
    out = np.empty((n_mc, k))
    beta_draws = np.empty((n_mc, k, k)) if _needs_beta_draws(spec) else None
    done = 0
    chunk_index = 0
    base = rng if isinstance(rng, RngStream) else None
    gen = None if base is not None else _generator(rng)
    while done < n_mc:
        b = min(_CHUNK, n_mc - done)
        g = base.substream(chunk_index).generator() if base is not None else gen
        if beta_draws is not None:
            g_beta = (
                base.substream(_BETA_STREAM_OFFSET + chunk_index).generator()
                if base is not None
                else gen
            )
            beta_draws[done : done + b] = _matrix_beta_batch(
                b, k, 0.5 * (k + 1), 0.5 * (N - k - p), g_beta
            )
        chunk_index += 1
        H1 = haar_stiefel_batch(b, N - k, k + p, g)
        Q1 = haar_stiefel_batch(b, k + p, k, g)
        G = np.einsum("bji,j,bjl->bil", H1, sig2_sq, H1)
        if high_rank:
            M = np.einsum("bji,bjl->bil", Q1, np.linalg.solve(G, Q1))
            A = sig1[None, :, None] * M * sig1[None, None, :]
            w = np.linalg.eigvalsh(A)
            if np.any(w <= 0):
                raise SingularDraw("sampled quadratic form numerically singular")
            out[done : done + b] = 1.0 / w
        else:
            nullity = (k + p) - (r - k)
            for i in range(b):
                w, v = np.linalg.eigh(G[i])
                wmax = max(w[-1], 0.0)
                null_mask = w <= rel_tol * wmax
                if int(np.sum(null_mask)) != nullity:
                    logger.info("resampling a draw with excess numerical nullity")
                    g2 = (
                        base.substream(_RESAMPLE_STREAM_OFFSET + chunk_index).generator()
                        if base is not None
                        else gen
                    )
                    H1[i] = haar_stiefel_batch(1, N - k, k + p, g2)[0]
                    Q1[i] = haar_stiefel_batch(1, k + p, k, g2)[0]
                    G[i] = np.einsum("ji,j,jl->il", H1[i], sig2_sq, H1[i])
                    w, v = np.linalg.eigh(G[i])
                    wmax = max(w[-1], 0.0)
                    null_mask = w <= rel_tol * wmax
                    if int(np.sum(null_mask)) != nullity:
                        raise SingularDraw("repeated rank-deficient draw")
                keep = ~null_mask
                G_pinv = (v[:, keep] / w[keep]) @ v[:, keep].T
                P = perp_projector(Q1[i], G[i], rel_tol)
                B = P @ Q1[i].T @ G_pinv @ Q1[i] @ P
                B_pinv = pseudoinverse(0.5 * (B + B.T), rel_tol)
                T = (B_pinv / sig1[:, None]) / sig1[None, :]
                out[done + i] = np.clip(np.linalg.eigvalsh(0.5 * (T + T.T)), 0.0, None)
        done += b
    return out, beta_draws


def sample_S_eigs(spec: Spectrum, theta: float, rng) -> np.ndarray:
    """One draw of the eigenvalues of S_theta, each in (0, 1]."""
    if not (0 < theta < np.pi / 2):
        raise ValueError("theta must lie strictly between 0 and pi/2")
    if spec.k < 1:
        raise ValueError("k must be at least 1")
    if spec.r <= spec.k + spec.p:
        raise ValueError("requires r > k + p (otherwise the angle is 0 almost surely)")
    t, _ = _draw_t_eigs(spec, 1, rng)
    c2 = 1.0 / np.tan(theta) ** 2
    return np.clip(1.0 / (1.0 + c2 * t[0]), EIG_FLOOR, 1.0)


class _IntegrandBatch:
    """Vectorized per-draw CDF integrand for fixed (N, k, p, ctrl).

    Routing per the module docstring: odd p uses the exact terminating
    series; even p with k = 1 uses the scalar pre-reflection form; even p
    with k >= 2 uses the matrix Beta expectation (one Y per draw). The
    fallback for even p with N < 2k + p is the pre-reflection zonal series,
    whose convergence degrades as eigenvalues approach 1.
    """

    def __init__(self, N: int, k: int, p: int, ctrl: SeriesControl):
        self.N, self.k, self.p = N, k, p
        self.gamma = 0.5 * (N - k - p)
        if p % 2 == 1:
            self.mode = "terminating"
            self.ev = tilde_evaluator(k, p, self.gamma, ctrl)
        elif k == 1:
            self.mode = "scalar"
            self.prefactor = gamma_prefactor_tilde_cdf(N, k, p)
        elif N >= 2 * k + p:
            self.mode = "beta_mc"
            self.prefactor = gamma_prefactor_tilde_cdf(N, k, p)
        else:
            self.mode = "series"
            self.prefactor = gamma_prefactor_tilde_cdf(N, k, p)
            self.ev = SeriesEvaluator(
                k, (0.5 * (1 - p), self.gamma), (0.5 * (N - p + 1),), ctrl
            )

    def __call__(self, s: np.ndarray, beta_draws: np.ndarray | None = None) -> np.ndarray:
        s = np.clip(s, EIG_FLOOR, 1.0)
        if self.mode == "scalar":
            x = s[:, 0]
            f = hyp2f1(0.5 * (1 - self.p), self.gamma, 0.5 * (self.N - self.p + 1), x)
            return self.prefactor * np.exp(self.gamma * np.log(x)) * f
        det_pow = np.exp(self.gamma * np.sum(np.log(s), axis=1))
        if self.mode == "terminating":
            tilde, _, _ = self.ev.evaluate_batch(1.0 - s)
            return det_pow * tilde
        if self.mode == "series":
            f, _, _ = self.ev.evaluate_batch(s)
            return self.prefactor * det_pow * f
        # beta_mc: |I - S^(1/2) (I - Y) S^(1/2)| stays in (0, 1]
        root = np.sqrt(s)
        k = self.k
        A = np.eye(k)[None, :, :] - root[:, :, None] * (
            np.eye(k)[None, :, :] - beta_draws
        ) * root[:, None, :]
        _, logdet = np.linalg.slogdet(A)
        return self.prefactor * det_pow * np.exp(0.5 * (self.p - 1) * logdet)


def cdf_curve(
    spec: Spectrum,
    thetas,
    n_mc: int,
    rng,
    ctrl: SeriesControl = SeriesControl(),
    mc_inputs: tuple | None = None,
) -> list[CdfEstimate]:
    """CDF estimates on a theta grid with common random numbers across the grid.

    Passing precomputed mc_inputs (the tuple returned by a previous draw)
    reuses the same draws; otherwise n_mc draws are made from rng.
    """
    thetas = np.asarray(thetas, dtype=float)
    if np.any(thetas < 0) or np.any(thetas > np.pi / 2 + 1e-12):
        raise ValueError("theta values must lie in [0, pi/2]")
    N, k, p, r = spec.N, spec.k, spec.p, spec.r
    if k == 0:
        return [CdfEstimate(float(t), 1.0, 0.0, 0, "exact_capture") for t in thetas]
    if k + p >= r:
        return [
            CdfEstimate(float(t), 1.0 if t > 0 else 0.0, 0.0, 0, "exact_capture")
            for t in thetas
        ]
    regime = "high_rank" if r >= 2 * k + p else "low_rank"
    if mc_inputs is None:
        mc_inputs = _draw_t_eigs(spec, n_mc, rng)
    t_eigs, beta_draws = mc_inputs
    n = t_eigs.shape[0]
    integrand = _IntegrandBatch(N, k, p, ctrl)
    out = []
    for theta in thetas:
        theta = float(theta)
        if theta <= 0.0:
            out.append(CdfEstimate(theta, 0.0, 0.0, 0, regime))
            continue
        if theta >= np.pi / 2:
            out.append(CdfEstimate(theta, 1.0, 0.0, 0, regime))
            continue
        c2 = 1.0 / np.tan(theta) ** 2
        s = 1.0 / (1.0 + c2 * t_eigs)
        vals = integrand(s, beta_draws)
        mean = float(np.mean(vals))
        stderr = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        out.append(CdfEstimate(theta, min(max(mean, 0.0), 1.0), stderr, n, regime))
    return out


def cdf(
    spec: Spectrum,
    theta: float,
    n_mc: int = 1000,
    rng: RngStream = RngStream(0),
    ctrl: SeriesControl = SeriesControl(),
) -> CdfEstimate:
    """Probability that the largest principal angle is below theta."""
    if not (0 <= theta <= np.pi / 2 + 1e-12):
        raise ValueError("theta must lie in [0, pi/2]")
    if n_mc < 1:
        raise ValueError("n_mc must be at least 1")
    return cdf_curve(spec, [theta], n_mc, rng, ctrl)[0]


def invert_cdf(
    spec: Spectrum,
    q: float,
    n_mc: int = 1000,
    rng: RngStream = RngStream(0),
    tol_theta: float = 1e-6,
    ctrl: SeriesControl = SeriesControl(),
) -> float:
    """Angle theta_q with estimated CDF(theta_q) = q, by monotone bisection.

    The same draws are reused at every theta, so the bisection target is a
    fixed (nondecreasing in expectation, and for the deterministic and odd-p
    paths pathwise nondecreasing) function of theta.
    """
    if not (0 < q < 1):
        raise ValueError("q must lie in (0, 1)")
    if spec.k == 0 or spec.k + spec.p >= spec.r:
        return 0.0
    mc_inputs = _draw_t_eigs(spec, n_mc, rng)
    lo, hi = 0.0, float(np.pi / 2)
    while hi - lo > tol_theta:
        mid = 0.5 * (lo + hi)
        val = cdf_curve(spec, [mid], n_mc, rng, ctrl, mc_inputs=mc_inputs)[0].value
        if val < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
