"""Hypergeometric series of matrix argument.

Series are summed shell by shell (all partitions of equal weight together) so
that truncation diagnostics are meaningful. The limit function used by the
angle CDF — the Gauss series whose first numerator and denominator parameters
coincide at (1-p)/2 — is evaluated term-wise: partitions whose numerator
shifted factorial is exactly zero are dropped, every other term carries ratio
one. For odd p this reproduces the exact terminating series; for even p it is
a convergent series truncated at a maximum weight.
"""

from dataclasses import dataclass
from math import lgamma, pi

import numpy as np

from .partitions import (
    Partition,
    _monomial_coeffs,
    _zonal_norm_const_log,
    enumerate_partitions,
    monomial_values_batch,
    pochhammer_partition_signed_log,
    zonal_identity_log,
)


class DivergedSeries(Exception):
    """Shell magnitudes grew across the final shells of a truncated series."""


class ParameterPole(Exception):
    """A parameter hit a pole (zero denominator with nonzero numerator)."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation weight, part-size cap, and tail tolerance for series sums."""

    max_weight: int = 40
    part_cap: int | None = None
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.max_weight < 0:
            raise ValueError("max_weight must be nonnegative")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")


@dataclass(frozen=True)
class SeriesResult:
    value: float
    last_shell: float
    terminated: bool


def mvgamma_ln(k: int, a: float) -> float:
    """Log of the multivariate gamma function Gamma_k(a)."""
    if k < 1:
        raise ValueError("k must be positive")
    total = 0.25 * k * (k - 1) * np.log(pi)
    for i in range(k):
        arg = a - 0.5 * i
        if arg <= 0 and abs(arg - round(arg)) < 1e-12:
            raise ParameterPole(f"Gamma factor argument {arg} is a nonpositive integer")
        total += lgamma(arg)
    return float(total)


def gamma_prefactor_tilde_cdf(N: int, k: int, p: int) -> float:
    """Scalar prefactor of the pre-reflection CDF representation:
    Gamma_k(N/2) Gamma_k((k+1)/2) / (Gamma_k((k+p)/2) Gamma_k((N-p+1)/2))."""
    if N < k + p:
        raise ValueError("N must be at least k + p")
    log = (
        mvgamma_ln(k, 0.5 * N)
        + mvgamma_ln(k, 0.5 * (k + 1))
        - mvgamma_ln(k, 0.5 * (k + p))
        - mvgamma_ln(k, 0.5 * (N - p + 1))
    )
    return float(np.exp(log))


def _shell_partitions(
    weight: int, k: int, part_cap: int | None, row2_cap: int | None
) -> list[Partition]:
    """Partitions of `weight` with at most k parts, first part at most
    part_cap, and parts after the first at most row2_cap (both optional).

    The row2 cap enumerates directly as (first part, small remainder) pairs,
    so shells stay cheap even at large weight when the remainder is bounded.
    """
    if row2_cap is None:
        cap = weight if part_cap is None else min(part_cap, weight)
        return enumerate_partitions(weight, cap, k)
    out: list[Partition] = []
    for rest_weight in range(min(row2_cap * (k - 1), weight) + 1):
        first = weight - rest_weight
        if part_cap is not None and first > part_cap:
            continue
        for rest in enumerate_partitions(rest_weight, row2_cap, k - 1):
            if rest and rest[0] > first:
                continue
            out.append((first,) + rest if first > 0 else rest)
    out.sort(reverse=True)
    return out


def _shell_weights(
    weight: int,
    k: int,
    numer: tuple[float, ...],
    denom: tuple[float, ...],
    part_cap: int | None,
    row2_cap: int | None = None,
) -> list[tuple[Partition, float, float]]:
    """(kappa, sign, log magnitude) triples for one shell of a pFq series.

    The coefficient is prod (a_i)_kappa / (weight! * prod (b_j)_kappa), kept
    in log space with sign tracking so that large truncation weights neither
    overflow nor underflow before the zonal normalization is folded in.
    Partitions whose numerator product is exactly zero are omitted. A zero
    denominator with a nonzero numerator raises ParameterPole.
    """
    out = []
    log_fact = lgamma(weight + 1)
    for kappa in _shell_partitions(weight, k, part_cap, row2_cap):
        sign = 1.0
        log = -log_fact
        zero = False
        for a in numer:
            s, lg = pochhammer_partition_signed_log(a, kappa)
            if s == 0.0:
                zero = True
                break
            sign *= s
            log += lg
        if zero:
            continue
        for b in denom:
            s, lg = pochhammer_partition_signed_log(b, kappa)
            if s == 0.0:
                raise ParameterPole(
                    f"denominator parameter {b} has a zero shifted factorial at {kappa} "
                    "with nonzero numerator"
                )
            sign *= s
            log -= lg
        out.append((kappa, sign, log))
    return out


class SeriesEvaluator:
    """Shell-wise evaluator of a zonal series on batches of eigenvalue rows.

    Per-shell coefficients are aggregated in the monomial symmetric basis
    (g_lam = sum over kappa of w_kappa * C-normalization * c_{kappa,lam}), so
    an evaluation costs one monomial dynamic program plus dot products. The
    aggregated vectors depend only on (parameters, k) and are cached on the
    instance, which makes repeated evaluation across Monte Carlo draws and
    theta grids cheap.
    """

    def __init__(
        self,
        k: int,
        numer: tuple[float, ...],
        denom: tuple[float, ...],
        ctrl: SeriesControl,
        exact_max_weight: int | None = None,
        part_cap: int | None = None,
        row2_cap: int | None = None,
    ):
        self.k = k
        self.numer = tuple(float(a) for a in numer)
        self.denom = tuple(float(b) for b in denom)
        self.ctrl = ctrl
        self.exact_max_weight = exact_max_weight
        cap = part_cap if part_cap is not None else ctrl.part_cap
        self.part_cap = cap
        self.row2_cap = row2_cap
        self._shell_g: dict[int, dict[Partition, float]] = {}

    def shell_g(self, weight: int) -> dict[Partition, float]:
        cached = self._shell_g.get(weight)
        if cached is not None:
            return cached
        g: dict[Partition, float] = {}
        for kappa, sign, log in _shell_weights(
            weight, self.k, self.numer, self.denom, self.part_cap, self.row2_cap
        ):
            scale = sign * float(np.exp(log + _zonal_norm_const_log(kappa)))
            for lam, c in _monomial_coeffs(kappa, self.k).items():
                g[lam] = g.get(lam, 0.0) + scale * c
        self._shell_g[weight] = g
        return g

    def _shell_values(self, weights: list[int], X: np.ndarray) -> list[np.ndarray]:
        shells = [self.shell_g(w) for w in weights]
        lams = sorted({lam for g in shells for lam in g}, key=lambda t: (sum(t), t))
        n = X.shape[0]
        if not lams:
            return [np.zeros(n) for _ in weights]
        mono = monomial_values_batch(lams, X)
        out = []
        for g in shells:
            acc = np.zeros(n)
            for lam, coeff in g.items():
                acc = acc + coeff * mono[lam]
            out.append(acc)
        return out

    def _shell_value_identity(self, weight: int, log_x: float) -> float | None:
        """One shell evaluated at x*I_k through the closed form of zonal
        polynomials at the identity — no monomial expansion, so very large
        truncation weights stay cheap. None marks an empty shell."""
        pairs = _shell_weights(
            weight, self.k, self.numer, self.denom, self.part_cap, self.row2_cap
        )
        if weight > 0 and not pairs:
            return None
        total = 0.0
        for kappa, sign, log in pairs:
            total += sign * np.exp(
                log + zonal_identity_log(kappa, self.k) + weight * log_x
            )
        return total

    def evaluate_scalar_matrix(self, x: float) -> tuple[float, float, bool]:
        """Sum the series at the scalar matrix x*I_k.

        Terminating series are summed exactly. Truncated series run shell by
        shell until the last few shells are below the relative tail tolerance
        or a (generous, since shells are cheap here) weight cap is reached.
        """
        if x == 0.0:
            return 1.0, 0.0, True
        log_x = float(np.log(x))
        if self.exact_max_weight is not None:
            last = 0.0
            total = 0.0
            for w in range(self.exact_max_weight + 1):
                shell = self._shell_value_identity(w, log_x)
                if shell is None:
                    break
                last = shell
                total += last
            return total, abs(last), True
        tol = self.ctrl.tail_tol
        cap = max(self.ctrl.max_weight, 50_000)
        total = 0.0
        mags = []
        for w in range(cap + 1):
            shell = self._shell_value_identity(w, log_x)
            if shell is None:
                return total, (mags[-1] if mags else 0.0), True
            total += shell
            mags.append(abs(shell))
            scale = max(1.0, abs(total))
            if len(mags) >= 3 and max(mags[-3:]) <= tol * scale:
                return total, mags[-1], False
        raise DivergedSeries(
            f"scalar-matrix series not below tolerance by weight {cap}"
        )

    def evaluate_batch(self, X: np.ndarray) -> tuple[np.ndarray, float, bool]:
        """Sum the series at each row of X.

        Returns (values, last_shell_magnitude, terminated). Terminating series
        are summed exactly; otherwise shells are added until the largest shell
        magnitude over the batch falls below tail_tol or max_weight is hit.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.exact_max_weight is not None:
            weights = list(range(self.exact_max_weight + 1))
            shells = self._shell_values(weights, X)
            value = np.sum(shells, axis=0)
            last = float(np.max(np.abs(shells[-1]))) if shells else 0.0
            return value, last, True
        L = self.ctrl.max_weight
        tol = self.ctrl.tail_tol
        try_L = min(12, L)
        while True:
            weights = list(range(try_L + 1))
            # natural termination: an all-zero shell ends the series exactly
            # (the surviving-partition set is a down-set, so shells are
            # contiguous)
            shells = []
            terminated = False
            for w in weights:
                if w > 0 and not self.shell_g(w):
                    terminated = True
                    weights = weights[:w]
                    break
            shells = self._shell_values(weights, X)
            mags = [float(np.max(np.abs(s))) for s in shells]
            if terminated:
                return np.sum(shells, axis=0), (mags[-1] if mags else 0.0), True
            # the tail tolerance is relative to the running sum, so series
            # whose shells legitimately grow large before decaying are not cut
            # off prematurely
            scale = max(1.0, float(np.max(np.abs(np.sum(shells, axis=0)))))
            if mags[-1] <= tol * scale or try_L >= L:
                break
            try_L = min(L, 2 * try_L)
        if len(mags) >= 3 and mags[-1] > tol * scale and mags[-3] < mags[-2] < mags[-1]:
            raise DivergedSeries(
                f"shell magnitudes {mags[-3]:.3e}, {mags[-2]:.3e}, {mags[-1]:.3e} "
                f"growing at truncation weight {try_L}"
            )
        return np.sum(shells, axis=0), mags[-1], False


def hyp_pFq(numer, denom, eigenvalues, ctrl: SeriesControl = SeriesControl()) -> SeriesResult:
    """Truncated hypergeometric function of matrix argument, pFq, evaluated
    at the given eigenvalue list via its zonal polynomial series."""
    x = np.asarray(eigenvalues, dtype=float)
    ev = SeriesEvaluator(x.size, tuple(numer), tuple(denom), ctrl)
    value, last, terminated = ev.evaluate_batch(x[None, :])
    return SeriesResult(value=float(value[0]), last_shell=last, terminated=terminated)


def tilde_evaluator(k: int, p: int, gamma: float, ctrl: SeriesControl) -> SeriesEvaluator:
    """Evaluator for the coincident-parameter Gauss series at (1-p)/2.

    Term-wise the coincident numerator and denominator factorials cancel, so
    each surviving partition carries weight (gamma)_kappa / weight!. For odd p
    the survivors are exactly the partitions with kappa_1 <= (p-1)/2, giving a
    terminating sum of maximum weight k*(p-1)/2.
    """
    if p % 2 == 1:
        mu = (p - 1) // 2
        return SeriesEvaluator(
            k, (gamma,), (), ctrl, exact_max_weight=k * mu, part_cap=mu
        )
    # Even p: the surviving partitions are exactly those whose second part is
    # at most p/2 (larger second parts zero out the coincident parameter's
    # shifted factorial); survivors carry plain weight (gamma)_kappa / weight!.
    # Enumerating with the second-row cap keeps shells small even at large
    # truncation weights, where kappa_1 alone keeps growing.
    return SeriesEvaluator(k, (gamma,), (), ctrl, row2_cap=p // 2)


def tilde_2F1(p: int, gamma: float, eigenvalues, ctrl: SeriesControl = SeriesControl()) -> SeriesResult:
    """The limit Gauss function of matrix argument with coincident first
    numerator and denominator parameters (1-p)/2, at the given eigenvalues
    (those of I - S, each in [0, 1])."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    x = np.asarray(eigenvalues, dtype=float)
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise ValueError("eigenvalues must lie in [0, 1]")
    ev = tilde_evaluator(x.size, p, gamma, ctrl)
    value, last, terminated = ev.evaluate_batch(np.clip(x, 0.0, 1.0)[None, :])
    return SeriesResult(value=float(value[0]), last_shell=last, terminated=terminated)
