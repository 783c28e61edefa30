"""Statistics of geometrically distributed entanglement-distribution attempts.

Attempts are counted from 1: a segment that succeeds on its first try has
used one time slot. W = |N1 - N2| is the number of slots the first finished
segment of a station waits for its neighbour; D_n sums W over the n - 1
stations, treating the stations as independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, entr, gammaln

from .errors import DomainError

# Block length for the raw-rate tail series.
_TAIL_BLOCK = 1 << 16
_TAIL_RTOL = 1e-17
_TAIL_MAX_BLOCKS = 64
# Below this failure rate -log(q) the tail series is replaced by
# H_n / lambda + 1/2, whose relative error is O(lambda^2).
ASYMPTOTIC_LAMBDA = 1e-4


@dataclass(frozen=True)
class GeomParams:
    p: float
    q: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.p <= 1.0):
            raise DomainError(f"success probability must lie in (0, 1], got {self.p}")
        object.__setattr__(self, "q", 1.0 - self.p)


def _check_q(q: float) -> None:
    if not (0.0 <= q < 1.0):
        raise DomainError(
            f"failure probability must lie in [0, 1), got {q} (segment never succeeds at q = 1)"
        )


def _check_a(a: float) -> None:
    # |a| <= 1 keeps the geometric series convergent; parity characters may be negative.
    if not (-1.0 <= a <= 1.0):
        raise DomainError(f"base must lie in [-1, 1], got {a}")


def diff_pmf(k: int, q: float) -> float:
    """P(N1 - N2 = k) for two i.i.d. geometrics with failure probability q."""
    _check_q(q)
    p = 1.0 - q
    # p^2 / (1 - q^2) == p / (1 + q)
    return p / (1.0 + q) * q ** abs(k)


def wait_pmf(k: int, q: float) -> float:
    """P(|N1 - N2| = k)."""
    _check_q(q)
    if k < 0:
        raise DomainError(f"waiting time must be nonnegative, got {k}")
    p = 1.0 - q
    if k == 0:
        return p / (1.0 + q)
    return 2.0 * p * q**k / (1.0 + q)


def wait_tail(k_max: int, q: float) -> float:
    """Probability mass of W beyond k_max."""
    _check_q(q)
    if k_max < 0:
        raise DomainError(f"k_max must be nonnegative, got {k_max}")
    return 2.0 * q ** (k_max + 1) / (1.0 + q)


def mean_wait(q: float) -> float:
    _check_q(q)
    return 2.0 * q / ((1.0 - q) * (1.0 + q))


def log_expect_pow_wait(a: float, q: float) -> float:
    """log E(a^W); stays finite where E(a^W)^(n-1) would underflow."""
    _check_a(a)
    _check_q(q)
    if a == 1.0 or q == 0.0:
        return 0.0
    aq = a * q
    return math.log1p(-q) - math.log1p(q) + math.log1p(aq) - math.log1p(-aq)


def expect_pow_wait(a: float, q: float) -> float:
    """E(a^W) = (1 - q)/(1 + q) * (1 + aq)/(1 - aq)."""
    _check_a(a)
    _check_q(q)
    return (1.0 - q) / (1.0 + q) * (1.0 + a * q) / (1.0 - a * q)


def expect_pow_dsum(a: float, q: float, n: int) -> float:
    """E(a^{D_n}) ~ E(a^W)^(n - 1) under the independent-stations approximation."""
    if n < 1:
        raise DomainError(f"segment count must be >= 1, got {n}")
    if n == 1 or q == 0.0:
        _check_a(a)
        _check_q(q)
        return 1.0
    return math.exp((n - 1) * log_expect_pow_wait(a, q))


def expected_max_attempts(n: int, p: float) -> float:
    """E[max of n i.i.d. geometrics] = sum_{k>=0} [1 - (1 - q^k)^n].

    Equal to the alternating binomial sum of the raw-rate formula but free
    of its cancellation, so it stays accurate for large n. Long segments
    (p so small that the series would need millions of terms) use the
    Euler-Maclaurin limit H_n / lambda + 1/2 with lambda = -log(1 - p).
    """
    if n < 1:
        raise DomainError(f"segment count must be >= 1, got {n}")
    GeomParams(p)
    if p == 1.0:
        return 1.0
    if n == 1:
        return 1.0 / p
    # From p directly: q = 1 - p may round to 1 for long segments.
    lam = -math.log1p(-p)
    if lam < ASYMPTOTIC_LAMBDA:
        return harmonic_number(n) / lam + 0.5
    # k = 0 contributes exactly 1.
    partials = [1.0]
    for block in range(_TAIL_MAX_BLOCKS):
        start = 1 + block * _TAIL_BLOCK
        k = np.arange(start, start + _TAIL_BLOCK, dtype=np.float64)
        terms = -np.expm1(n * np.log1p(-np.exp(-lam * k)))
        partials.append(float(np.sum(terms)))
        total = math.fsum(partials)
        if terms[-1] <= _TAIL_RTOL * total:
            return total
    raise DomainError(f"tail series for n={n}, p={p} did not converge")


def harmonic_number(n: int) -> float:
    """H_n = digamma(n + 1) + Euler's constant."""
    return float(digamma(n + 1) + np.euler_gamma)


def alternating_max_attempts(n: int, p: float) -> float:
    """The alternating binomial form sum_i (-1)^(i+1) C(n, i) / (1 - q^i).

    Binomials are taken in the log domain and the sum is exactly rounded, but
    the cancellation still grows like C(n, n/2); use it only as a cross-check
    for small n.
    """
    if n < 1:
        raise DomainError(f"segment count must be >= 1, got {n}")
    q = GeomParams(p).q
    log_n_fact = gammaln(n + 1)
    terms = []
    for i in range(1, n + 1):
        log_binom = log_n_fact - gammaln(i + 1) - gammaln(n - i + 1)
        denom = -math.expm1(i * math.log(q)) if q > 0.0 else 1.0
        sign = 1.0 if i % 2 == 1 else -1.0
        terms.append(sign * math.exp(log_binom) / denom)
    return math.fsum(terms)


def raw_rate(n: int, p: float, tau0: float) -> float:
    """Entanglement distribution rate over n segments, in Hz."""
    if tau0 <= 0.0:
        raise DomainError(f"signaling period must be positive, got {tau0}")
    if p == 0.0:
        raise DomainError("distribution success probability is 0: raw rate is 0")
    return 1.0 / (tau0 * expected_max_attempts(n, p))


def binary_entropy(x: float) -> float:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"binary entropy needs x in [0, 1], got {x}")
    # entr(0) == 0 gives the x log x -> 0 limit at both ends.
    return float((entr(x) + entr(1.0 - x)) / math.log(2.0))
