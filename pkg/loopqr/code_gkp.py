"""Secret key fraction of GKP and Steane-GKP repeaters.

Pauli errors are tracked as parity distributions [1 - p, p]. Two evaluation
paths exist for the QBER: closed forms (production) and a generic
convolution engine (cross-check). Both rely on the parity character
1 - 2p, which turns k-fold convolution into a k-th power.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.stats import binom

from . import gauss_noise
from .errors import DomainError
from .geom_stats import binary_entropy, expect_pow_dsum, log_expect_pow_wait

PAIR_ATOL = 1e-12


class StategenMode(str, enum.Enum):
    """Level at which state-generation Pauli errors enter the Steane-GKP QBER."""

    BARE = "bare"
    TRANSFERRED = "transferred"


@dataclass(frozen=True)
class PauliPair:
    p_no_error: float
    p_error: float

    def __post_init__(self) -> None:
        if self.p_no_error < 0.0 or self.p_error < 0.0:
            raise DomainError(f"Pauli pair entries must be nonnegative: {self}")
        if abs(self.p_no_error + self.p_error - 1.0) > PAIR_ATOL:
            raise DomainError(f"Pauli pair must sum to 1: {self}")

    @classmethod
    def from_error(cls, p: float) -> "PauliPair":
        return cls(1.0 - p, p)

    @property
    def character(self) -> float:
        return self.p_no_error - self.p_error


IDENTITY = PauliPair(1.0, 0.0)


@dataclass(frozen=True)
class GkpElementaryProbs:
    p_corr: float
    p_swap: float
    p_stategen: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p_corr", "p_swap", "p_stategen"):
            value = getattr(self, name)
            if not (0.0 <= value <= 0.5):
                raise DomainError(f"{name} must lie in [0, 1/2], got {value}")


def convolve_pauli(a: PauliPair, b: PauliPair) -> PauliPair:
    """Circular convolution over the parity index mod 2.

    Only the odd entry is accumulated; the even entry is its complement, so
    long chains of convolutions stay normalized.
    """
    p_error = min(1.0, a.p_no_error * b.p_error + a.p_error * b.p_no_error)
    return PauliPair(1.0 - p_error, p_error)


def pauli_power(pair: PauliPair, k: int) -> PauliPair:
    """k-fold self-convolution by binary exponentiation."""
    if k < 0:
        raise DomainError(f"convolution power must be nonnegative, got {k}")
    result = IDENTITY
    base = pair
    while k:
        if k & 1:
            result = convolve_pauli(result, base)
        base = convolve_pauli(base, base)
        k >>= 1
    return result


def expected_pauli_power(
    pair: PauliPair,
    q: float,
    n: int,
    m: int,
    *,
    extra: PauliPair = IDENTITY,
    extra_offset: int = 0,
) -> PauliPair:
    """E(pair^{*M_n} * extra^{*(M_n + extra_offset)}) with M_n = m D_n + 2m(n - 1).

    The random part goes through the parity character: E(c^{m D_n}) is
    expect_pow_dsum(c^m). The deterministic parts are convolved explicitly.
    """
    fixed = convolve_pauli(
        pauli_power(pair, 2 * m * (n - 1)),
        pauli_power(extra, 2 * m * (n - 1) + extra_offset),
    )
    per_wait = pauli_power(convolve_pauli(pair, extra), m).character
    random_character = min(1.0, max(-1.0, expect_pow_dsum(per_wait, q, n)))
    waited = PauliPair(0.5 * (1.0 + random_character), 0.5 * (1.0 - random_character))
    return convolve_pauli(fixed, waited)


def gkp_elementary_probs(delta2: float, eta_loop: float) -> GkpElementaryProbs:
    lossless = gauss_noise.stripe_error_prob(2.0 * delta2)
    return GkpElementaryProbs(
        p_corr=gauss_noise.stripe_error_prob(
            gauss_noise.total_correction_variance(delta2, eta_loop)
        ),
        p_swap=lossless,
        p_stategen=lossless,
    )


def steane_transfer(q_gkp: float) -> float:
    """No-logical-error probability of a Steane block: q^7 + 7 q^6 (1 - q)."""
    if not (0.0 <= q_gkp <= 1.0):
        raise DomainError(f"probability must lie in [0, 1], got {q_gkp}")
    return float(binom.cdf(1, 7, 1.0 - q_gkp))


def steane_logical_error(p_gkp: float) -> float:
    """1 - steane_transfer(1 - p), as P(two or more of seven flipped)."""
    if not (0.0 <= p_gkp <= 1.0):
        raise DomainError(f"probability must lie in [0, 1], got {p_gkp}")
    return float(binom.sf(1, 7, p_gkp))


def _log_abs_character(p: float) -> float:
    c = 1.0 - 2.0 * p
    if c == 0.0:
        return -math.inf
    return math.log1p(-2.0 * p) if c > 0.0 else math.log(-c)


def _character_power(p: float, k: int) -> float:
    """(1 - 2p)^k in the log domain; 1 - 2p is negative above p = 1/2."""
    if k == 0:
        return 1.0
    magnitude = math.exp(k * _log_abs_character(p))
    return -magnitude if (p > 0.5 and k % 2 == 1) else magnitude


def _odd_parity(p: float, k: int) -> float:
    """P(odd number of flips among k) = (1 - (1 - 2p)^k) / 2."""
    if 0.0 <= p < 0.5:
        return -0.5 * math.expm1(k * math.log1p(-2.0 * p))
    return 0.5 * (1.0 - _character_power(p, k))


def _xor(a: float, b: float) -> float:
    # QBER is reported within [0, 1/2].
    return min(0.5, a * (1.0 - b) + b * (1.0 - a))


def _check_chain(n: int, m: int, q: float) -> None:
    if n < 1:
        raise DomainError(f"segment count must be >= 1, got {n}")
    if m < 1:
        raise DomainError(f"loop count must be >= 1, got {m}")
    if not (0.0 <= q < 1.0):
        raise DomainError(f"failure probability must lie in [0, 1), got {q}")


def _all_other(p_corr: float, p_stategen: float, n: int, m: int, q: float) -> float:
    """Odd-parity probability over all corrections and state generations.

    Both fixed exponents, 2m(n-1) and 2(m+1)(n-1), are even, so the fixed
    factor is positive even when a character is negative.
    """
    fixed = 2 * m * (n - 1) * _log_abs_character(p_corr)
    fixed += 2 * (m + 1) * (n - 1) * _log_abs_character(p_stategen)
    if fixed == -math.inf:
        return 0.5
    per_wait = _character_power(p_corr, m) * _character_power(p_stategen, m)
    return -0.5 * math.expm1(fixed + (n - 1) * log_expect_pow_wait(per_wait, q))


def qber_gkp(probs: GkpElementaryProbs, n: int, m: int, q: float) -> float:
    """QBER of a GKP repeater; closed form with the independent-stations expectation."""
    _check_chain(n, m, q)
    if n == 1:
        return 0.0
    all_swap = _odd_parity(probs.p_swap, n - 1)
    all_corr = _all_other(probs.p_corr, 0.0, n, m, q)
    return _xor(all_corr, all_swap)


def steane_level_probs(
    probs: GkpElementaryProbs, stategen_mode: StategenMode = StategenMode.BARE
) -> tuple[float, float, float]:
    """(p_corr, p_swap, p_stategen) as seen by the Steane-GKP QBER."""
    p_stategen = probs.p_stategen
    if StategenMode(stategen_mode) is StategenMode.TRANSFERRED:
        p_stategen = steane_logical_error(p_stategen)
    return steane_logical_error(probs.p_corr), steane_logical_error(probs.p_swap), p_stategen


def qber_steane(
    probs: GkpElementaryProbs,
    n: int,
    m: int,
    q: float,
    stategen_mode: StategenMode = StategenMode.BARE,
) -> float:
    _check_chain(n, m, q)
    if n == 1:
        return 0.0
    p_corr, p_swap, p_stategen = steane_level_probs(probs, stategen_mode)
    all_swap = _odd_parity(p_swap, n - 1)
    all_other = _all_other(p_corr, p_stategen, n, m, q)
    return _xor(all_other, all_swap)


def qber_gkp_convolution(probs: GkpElementaryProbs, n: int, m: int, q: float) -> float:
    _check_chain(n, m, q)
    if n == 1:
        return 0.0
    waited = expected_pauli_power(PauliPair.from_error(probs.p_corr), q, n, m)
    swaps = pauli_power(PauliPair.from_error(probs.p_swap), n - 1)
    return convolve_pauli(waited, swaps).p_error


def qber_steane_convolution(
    probs: GkpElementaryProbs,
    n: int,
    m: int,
    q: float,
    stategen_mode: StategenMode = StategenMode.BARE,
) -> float:
    _check_chain(n, m, q)
    if n == 1:
        return 0.0
    p_corr, p_swap, p_stategen = steane_level_probs(probs, stategen_mode)
    # M~_n = M_n + 2(n - 1)
    waited = expected_pauli_power(
        PauliPair.from_error(p_corr),
        q,
        n,
        m,
        extra=PauliPair.from_error(p_stategen),
        extra_offset=2 * (n - 1),
    )
    swaps = pauli_power(PauliPair.from_error(p_swap), n - 1)
    return convolve_pauli(waited, swaps).p_error


def skf_gkp(epsilon: float) -> float:
    """max(0, 1 - 2 h(eps)); negative values mean no key."""
    return max(0.0, skf_gkp_unclamped(epsilon))


def skf_gkp_unclamped(epsilon: float) -> float:
    if not (0.0 <= epsilon <= 0.5 + PAIR_ATOL):
        raise DomainError(f"QBER must lie in [0, 1/2], got {epsilon}")
    return 1.0 - 2.0 * binary_entropy(min(epsilon, 0.5))
