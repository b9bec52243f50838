"""Closed-form probabilistic bounds on sin(theta_1) for the Gaussian RRF.

Each bound has the shape sin(theta_1) <= ratio * C / sqrt(1 + ratio^2 * C^2)
with probability at least 1 - delta, where the ratio is either the Frobenius
singular value ratio xi_k, the usual singular value ratio rho_k, or a scalar
ratio b/a, and C is a constant depending on (N, k, p, delta).
"""

from dataclasses import dataclass
from math import exp, floor, lgamma, log, sqrt

from .cdf import Spectrum


class DegenerateLeading(Exception):
    """The leading singular value block is singular (sigma_k = 0)."""


@dataclass(frozen=True)
class BoundReport:
    """A sin(theta_1) upper bound holding with probability at least 1 - delta."""

    method: str  # scalar | frobenius | gap | conjecture | cdf_estimated
    delta: float
    constant: float
    ratio: float
    sin_theta_bound: float
    unproven: bool = False


def _check_leading(spec: Spectrum) -> None:
    if not (1 <= spec.k < spec.N):
        raise ValueError("requires 1 <= k < N")
    if spec.sigma[spec.k - 1] <= 0:
        raise DegenerateLeading("sigma_k must be positive")


def frob_ratio(spec: Spectrum) -> float:
    """Frobenius singular value ratio
    xi_k = sqrt( sum_{j<=k} sigma_j^-2 * sum_{j>k} sigma_j^2 / (k(N-k)) )."""
    _check_leading(spec)
    sig = spec.array()
    k = spec.k
    inv_sq = float(sum(1.0 / s**2 for s in sig[:k]))
    tail_sq = float(sum(s**2 for s in sig[k:]))
    return sqrt(inv_sq * tail_sq / (k * (spec.N - k)))


def spectral_ratio(spec: Spectrum) -> float:
    """Singular value ratio rho_k = sigma_{k+1} / sigma_k."""
    _check_leading(spec)
    return float(spec.sigma[spec.k] / spec.sigma[spec.k - 1])


def _log_binom(x: float, m: float) -> float:
    """Log of the generalized binomial coefficient Gamma(x+1) /
    (Gamma(m+1) Gamma(x-m+1)), valid for half-integer x."""
    return lgamma(x + 1.0) - lgamma(m + 1.0) - lgamma(x - m + 1.0)


def scalar_constant(
    N: int,
    k: int,
    p: int,
    delta: float,
    form: str = "exact",
    proof_form: bool = False,
) -> float:
    """Tail constant C_{N,k,p,delta} of the scalar-spectrum bound.

    The exact form is [delta^{-1} binom(nu+mu, mu+1)]^{1/(p+1)} with
    nu = k(N-k-p)/2 and mu = max(0, floor((p-1)/2)); the generalized binomial
    is evaluated through log-gamma so half-integer nu is handled. The
    simplified form replaces the binomial by its elementary upper estimate,
    giving delta^{-1/(p+1)} sqrt(e(k(N-k-p)+p-1)/(p+1)). With proof_form the
    exact bracket is raised to 1/(2(mu+1)) instead of 1/(p+1); the two
    exponents coincide for odd p.
    """
    if N < k + p:
        raise ValueError("N must be at least k + p")
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    if form == "simplified":
        return delta ** (-1.0 / (p + 1)) * sqrt(
            exp(1.0) * (k * (N - k - p) + p - 1) / (p + 1)
        )
    if form != "exact":
        raise ValueError("form must be 'exact' or 'simplified'")
    nu = 0.5 * k * (N - k - p)
    mu = max(0, floor((p - 1) / 2))
    log_bracket = _log_binom(nu + mu, mu + 1.0) - log(delta)
    exponent = 1.0 / (2.0 * (mu + 1)) if proof_form else 1.0 / (p + 1)
    return exp(exponent * log_bracket)


def _sin_from_tan(ratio: float, constant: float) -> float:
    x = ratio * constant
    return x / sqrt(1.0 + x * x)


def _frobenius_constant(N: int, k: int, delta: float) -> float:
    return sqrt(k * (N - k - 1) / (2.0 * delta))


def bound_scalar(
    N: int, k: int, p: int, delta: float, ratio: float, proof_form: bool = False
) -> BoundReport:
    """Bound for scalar spectra (leading block a*I, tail b*I): the ratio b/a
    paired with C_{N,k,p,delta}."""
    if ratio < 0:
        raise ValueError("ratio must be nonnegative")
    c = scalar_constant(N, k, p, delta, proof_form=proof_form)
    return BoundReport("scalar", delta, c, ratio, _sin_from_tan(ratio, c))


def bound_frobenius(spec: Spectrum, delta: float) -> BoundReport:
    """Frobenius-ratio bound with C_{N,k,delta} = sqrt(k(N-k-1)/(2 delta))."""
    ratio = frob_ratio(spec)
    c = _frobenius_constant(spec.N, spec.k, delta)
    return BoundReport("frobenius", delta, c, ratio, _sin_from_tan(ratio, c))


def bound_gap(spec: Spectrum, delta: float, proof_form: bool = False) -> BoundReport:
    """Gap bound: rho_k paired with C_{N,k,p,delta} (flat worst case)."""
    ratio = spectral_ratio(spec)
    c = scalar_constant(spec.N, spec.k, spec.p, delta, proof_form=proof_form)
    return BoundReport("gap", delta, c, ratio, _sin_from_tan(ratio, c))


def bound_conjecture(spec: Spectrum, delta: float) -> BoundReport:
    """Conjectured bound: xi_k paired with C_{N,k,p,delta}.

    For p in {0, 1} this coincides with the proven Frobenius-ratio bound, so
    that constant is used directly there; the report is flagged unproven for
    all p because the pairing of xi_k with the oversampled constant is a
    conjecture, not a theorem.
    """
    ratio = frob_ratio(spec)
    if spec.p <= 1:
        c = _frobenius_constant(spec.N, spec.k, delta)
    else:
        c = scalar_constant(spec.N, spec.k, spec.p, delta)
    return BoundReport("conjecture", delta, c, ratio, _sin_from_tan(ratio, c), unproven=True)


def prop_lower_bound(N: int, k: int, p: int, s: float) -> float:
    """Scalar lower bound on the CDF integrand at S = s*I:
    1 - binom(nu+mu, mu+1) (1-s)^(mu+1) with nu = k(N-k-p)/2,
    mu = max(0, floor((p-1)/2))."""
    if not (0.0 <= s <= 1.0):
        raise ValueError("s must lie in [0, 1]")
    if N < k + p:
        raise ValueError("N must be at least k + p")
    nu = 0.5 * k * (N - k - p)
    mu = max(0, floor((p - 1) / 2))
    binom = exp(_log_binom(nu + mu, mu + 1.0))
    return 1.0 - binom * (1.0 - s) ** (mu + 1)
