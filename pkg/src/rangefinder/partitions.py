"""Integer partitions, partitional shifted factorials, and zonal polynomials.

Zonal polynomials are evaluated by expanding in the monomial symmetric
function basis. Coefficients come from the classical box-moving recurrence for
the monic Jack polynomial at parameter alpha = 2; the normalization constant
relating the monic polynomial to the convention sum_{kappa |- l} C_kappa(X) =
(tr X)^l is the hook-product formula. Coefficient tables depend only on the
shape kappa and the variable count, so they are cached process-wide.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import lgamma

import numpy as np

Partition = tuple[int, ...]


def enumerate_partitions(weight: int, max_part: int, max_len: int) -> list[Partition]:
    """All partitions of `weight` with parts <= max_part and at most max_len
    parts, in reverse-lexicographic order."""
    if weight < 0 or max_part < 0 or max_len < 0:
        raise ValueError("weight, max_part, and max_len must be nonnegative")
    out: list[Partition] = []

    def rec(remaining: int, cap: int, slots: int, prefix: list[int]):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        if slots == 0 or cap == 0:
            return
        for part in range(min(cap, remaining), 0, -1):
            prefix.append(part)
            rec(remaining - part, part, slots - 1, prefix)
            prefix.pop()

    rec(weight, max_part, max_len, [])
    return out


def _rising_signed_log(a: float, m: int) -> tuple[float, float]:
    """Rising factorial (a)_m as (sign, log magnitude); sign 0 on exact zero."""
    sign = 1.0
    log = 0.0
    for i in range(m):
        f = a + i
        if f == 0.0:
            return 0.0, -np.inf
        if f < 0.0:
            sign = -sign
        log += np.log(abs(f))
    return sign, log


def pochhammer_partition_signed_log(a: float, kappa: Partition) -> tuple[float, float]:
    """Partitional shifted factorial (a)_kappa as (sign, log magnitude)."""
    sign = 1.0
    log = 0.0
    for i, part in enumerate(kappa):
        s, lg = _rising_signed_log(a - 0.5 * i, part)
        if s == 0.0:
            return 0.0, -np.inf
        sign *= s
        log += lg
    return sign, log


def pochhammer_partition(a: float, kappa: Partition) -> float:
    """Partitional shifted factorial prod_i (a - (i-1)/2)_{kappa_i}.

    Exact zeros are preserved: a single zero factor in any rising factorial
    makes the result exactly 0.0.
    """
    sign, log = pochhammer_partition_signed_log(a, tuple(kappa))
    if sign == 0.0:
        return 0.0
    return sign * float(np.exp(log))


def _conjugate(kappa: Partition) -> Partition:
    if not kappa:
        return ()
    return tuple(sum(1 for part in kappa if part >= j) for j in range(1, kappa[0] + 1))


def _dominated_by(lam: Partition, kappa: Partition) -> bool:
    """True when lam <= kappa in the dominance order (equal weights assumed)."""
    total_l = 0
    total_k = 0
    for i in range(max(len(lam), len(kappa))):
        total_l += lam[i] if i < len(lam) else 0
        total_k += kappa[i] if i < len(kappa) else 0
        if total_l > total_k:
            return False
    return True


def _rho(kappa: Partition) -> int:
    return sum(part * (part - i) for i, part in enumerate(kappa, start=1))


@lru_cache(maxsize=None)
def _monomial_coeffs(kappa: Partition, max_len: int) -> dict[Partition, float]:
    """Monomial-basis coefficients of the monic Jack polynomial P_kappa at
    alpha = 2, restricted to monomials with at most max_len parts.

    Coefficients follow the box-moving recurrence: for lam < kappa,
    c_lam = sum over moves (lam_i + t, lam_j - t) of
    ((lam_i + t) - (lam_j - t)) * c_mu / (rho(kappa) - rho(lam)).
    """
    weight = sum(kappa)
    if weight == 0:
        return {(): 1.0}
    lams = [
        lam
        for lam in enumerate_partitions(weight, kappa[0], max_len)
        if _dominated_by(lam, kappa)
    ]
    lams.sort(reverse=True)  # descending lex order refines dominance
    coeffs: dict[Partition, float] = {kappa: 1.0}
    rho_kappa = _rho(kappa)
    for lam in lams:
        if lam == kappa:
            continue
        total = 0.0
        n = len(lam)
        for i in range(n):
            for j in range(i + 1, n):
                for t in range(1, lam[j] + 1):
                    parts = list(lam)
                    parts[i] += t
                    parts[j] -= t
                    mu = tuple(sorted((x for x in parts if x > 0), reverse=True))
                    c_mu = coeffs.get(mu)
                    if c_mu is not None:
                        total += ((lam[i] + t) - (lam[j] - t)) * c_mu
        coeffs[lam] = total / (rho_kappa - _rho(lam))
    return coeffs


@lru_cache(maxsize=None)
def _zonal_norm_const_log(kappa: Partition) -> float:
    """Log of the constant relating the monic Jack polynomial to the
    (tr X)^l-summing zonal normalization: C_kappa = const * P_kappa with
    const = 2^l * l! / prod_{cells} (2*(arm+1) + leg)."""
    weight = sum(kappa)
    conj = _conjugate(kappa)
    log = weight * np.log(2.0) + lgamma(weight + 1)
    for i, part in enumerate(kappa, start=1):
        for j in range(1, part + 1):
            arm = part - j
            leg = conj[j - 1] - i
            log -= np.log(2.0 * (arm + 1) + leg)
    return log


def _zonal_norm_const(kappa: Partition) -> float:
    return float(np.exp(_zonal_norm_const_log(kappa)))


@lru_cache(maxsize=None)
def zonal_identity_log(kappa: Partition, k: int) -> float:
    """Log of C_kappa(I_k), via the product formula for the monic Jack
    polynomial at the identity: P_kappa(1^k) = prod over cells (i,j) of
    (k + 2(j-1) - (i-1)) / (2*arm + leg + 1)."""
    kappa = tuple(int(p) for p in kappa)
    if not kappa:
        return 0.0
    if len(kappa) > k:
        return -np.inf
    conj = _conjugate(kappa)
    log = _zonal_norm_const_log(kappa)
    for i, part in enumerate(kappa, start=1):
        for j in range(1, part + 1):
            arm = part - j
            leg = conj[j - 1] - i
            log += np.log(k + 2.0 * (j - 1) - (i - 1)) - np.log(2.0 * arm + leg + 1.0)
    return float(log)


def _removals(lam: Partition) -> list[tuple[int, Partition]]:
    """Distinct parts of lam paired with lam minus one copy of that part."""
    out = []
    seen = set()
    for idx, part in enumerate(lam):
        if part in seen:
            continue
        seen.add(part)
        reduced = lam[:idx] + lam[idx + 1 :]
        out.append((part, reduced))
    return out


def _closure_under_removal(lams) -> list[Partition]:
    todo = list(lams)
    seen = set(todo)
    while todo:
        lam = todo.pop()
        for _, reduced in _removals(lam):
            if reduced not in seen:
                seen.add(reduced)
                todo.append(reduced)
    return sorted(seen, key=lambda t: (sum(t), t))


def monomial_values(lams, eigenvalues) -> dict[Partition, float]:
    """Evaluate monomial symmetric polynomials m_lam at an eigenvalue list."""
    x = np.asarray(eigenvalues, dtype=float)
    batch = monomial_values_batch(lams, x[None, :])
    return {lam: float(v[0]) for lam, v in batch.items()}


def monomial_values_batch(lams, X: np.ndarray) -> dict[Partition, np.ndarray]:
    """Evaluate m_lam at each row of X (shape (n, k)), for every lam.

    Dynamic program over variables: with M_j the values on the first j
    variables, M_j[lam] = M_{j-1}[lam] + sum over distinct parts e of lam of
    x_j^e * M_{j-1}[lam minus e].
    """
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    family = _closure_under_removal(list(lams))
    removals = {lam: _removals(lam) for lam in family}
    zeros = np.zeros(n)
    current: dict[Partition, np.ndarray] = {lam: zeros for lam in family}
    current[()] = np.ones(n)
    for j in range(k):
        xj = X[:, j]
        powers: dict[int, np.ndarray] = {}
        new: dict[Partition, np.ndarray] = {(): current[()]}
        for lam in family:
            if not lam:
                continue
            acc = current[lam]
            for e, reduced in removals[lam]:
                prev = current[reduced]
                if prev is zeros:
                    continue
                pw = powers.get(e)
                if pw is None:
                    pw = xj**e
                    powers[e] = pw
                acc = acc + pw * prev
            new[lam] = acc
        current = new
    return {lam: current[lam] for lam in lams}


def zonal_value(kappa, eigenvalues) -> float:
    """Zonal polynomial C_kappa of an eigenvalue list, normalized so that the
    weight-l sum over partitions equals (sum of eigenvalues)^l."""
    kappa = tuple(int(p) for p in kappa)
    if any(a < b for a, b in zip(kappa, kappa[1:])) or any(p < 1 for p in kappa):
        raise ValueError("kappa must be a weakly decreasing sequence of positive parts")
    x = np.asarray(eigenvalues, dtype=float)
    k = x.size
    if len(kappa) > k:
        return 0.0
    if not kappa:
        return 1.0
    coeffs = _monomial_coeffs(kappa, k)
    mono = monomial_values(list(coeffs.keys()), x)
    acc = sum(c * mono[lam] for lam, c in coeffs.items())
    return _zonal_norm_const(kappa) * acc


@dataclass(frozen=True)
class ZonalTable:
    """Precomputed zonal polynomial values for one eigenvalue list."""

    max_weight: int
    eigenvalues: tuple[float, ...]
    values: dict[Partition, float] = field(repr=False)

    def __getitem__(self, kappa) -> float:
        return self.values[tuple(kappa)]

    def partitions_of(self, weight: int) -> list[Partition]:
        return [kappa for kappa in self.values if sum(kappa) == weight]


def build_zonal_table(eigenvalues, max_weight: int, max_part: int | None = None) -> ZonalTable:
    """Tabulate C_kappa for all |kappa| <= max_weight with kappa_1 <= max_part
    and at most len(eigenvalues) parts, in one shared pass."""
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    x = np.asarray(eigenvalues, dtype=float)
    k = x.size
    kappas: list[Partition] = []
    for weight in range(max_weight + 1):
        cap = weight if max_part is None else min(max_part, weight)
        kappas.extend(enumerate_partitions(weight, cap, k))
    coeff_tables = {kappa: _monomial_coeffs(kappa, k) for kappa in kappas}
    needed = set()
    for table in coeff_tables.values():
        needed.update(table.keys())
    mono = monomial_values(sorted(needed, key=lambda t: (sum(t), t)), x)
    values = {
        kappa: _zonal_norm_const(kappa) * sum(c * mono[lam] for lam, c in table.items())
        if kappa
        else 1.0
        for kappa, table in coeff_tables.items()
    }
    return ZonalTable(max_weight=max_weight, eigenvalues=tuple(x), values=values)
