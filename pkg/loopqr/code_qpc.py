"""Quantum parity code: logical Bell measurement success and the QPC SKF.

A (b, a) code has b blocks of a dual-rail photons. A lossy logical BSM
succeeds when every block keeps at least one photon, at least one block
keeps all of them, and the second Bell index is found in one of the intact
blocks. QPC teleportations never introduce Pauli errors, so the SKF is the
probability that every teleportation succeeds.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from scipy.stats import binom

from .errors import DomainError
from .geom_stats import log_expect_pow_wait

DEFAULT_MAX_PHOTONS = 512
# Shapes above this are left to the closed form.
SUM_FORM_MAX_PHOTONS = 128


@dataclass(frozen=True)
class QpcShape:
    a: int
    b: int
    max_photons: int = DEFAULT_MAX_PHOTONS

    def __post_init__(self) -> None:
        if self.a < 1:
            raise DomainError(f"photons per block must be >= 1, got {self.a}")
        if self.b < 1:
            raise DomainError(f"block count must be >= 1, got {self.b}")
        if self.photons > self.max_photons:
            raise DomainError(
                f"(b={self.b}, a={self.a}) uses {self.photons} photons, above the limit {self.max_photons}"
            )

    @property
    def photons(self) -> int:
        return self.a * self.b


def _check_eta(eta: float) -> None:
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")


def qpc_no_loss_success(b: int) -> float:
    return -math.expm1(-b * math.log(2.0))


def qpc_success_closed(shape: QpcShape, eta: float) -> float:
    """[1 - (1 - eta)^a]^b - [1 - (1 - eta)^a - eta^a / 2]^b."""
    _check_eta(eta)
    lost_block = (1.0 - eta) ** shape.a
    kept_block = eta**shape.a
    return (1.0 - lost_block) ** shape.b - (1.0 - lost_block - kept_block / 2.0) ** shape.b


@functools.lru_cache(maxsize=None)
def _partial_loss_patterns(mu: int, parts: int, a: int) -> int:
    """sum over compositions j of mu into `parts` parts in [1, a - 1] of prod C(a, j_k)."""
    if parts == 0:
        return 1 if mu == 0 else 0
    if mu < parts or mu > parts * (a - 1):
        return 0
    return sum(
        math.comb(a, j) * _partial_loss_patterns(mu - j, parts - 1, a)
        for j in range(1, min(a - 1, mu) + 1)
    )


def qpc_success_given_losses(shape: QpcShape, mu: int) -> float:
    """Success probability when exactly mu of the a*b photons are lost."""
    if not (0 <= mu <= shape.photons):
        raise DomainError(f"loss count must lie in [0, {shape.photons}], got {mu}")
    a, b = shape.a, shape.b
    favourable = sum(
        (2 ** (b - i) - 1) * 2 ** i * math.comb(b, i) * _partial_loss_patterns(mu, i, a)
        for i in range(0, min(mu, b - 1) + 1)
    )
    # (1 - 2^-(b-i)) carried as the exact ratio (2^(b-i) - 1) 2^i / 2^b
    return favourable / (2**b * math.comb(shape.photons, mu))


def qpc_success_sum(shape: QpcShape, eta: float, *, max_photons: int = SUM_FORM_MAX_PHOTONS) -> float:
    """Loss-count mixture of qpc_success_given_losses; oracle for the closed form."""
    _check_eta(eta)
    if shape.photons > max_photons:
        raise DomainError(
            f"sum form limited to {max_photons} photons, shape has {shape.photons}"
        )
    mu_max = (shape.b - 1) * (shape.a - 1)
    total = [
        qpc_success_given_losses(shape, mu) * float(binom.pmf(mu, shape.photons, 1.0 - eta))
        for mu in range(mu_max + 1)
    ]
    return math.fsum(total)


def skf_qpc(shape: QpcShape, n: int, m: int, q: float, eta_loop: float) -> float:
    """[1 - 2^-b]^(n-1) * E(p_QPC^{M_n}), M_n = m D_n + 2m(n - 1)."""
    if n < 1:
        raise DomainError(f"segment count must be >= 1, got {n}")
    if m < 1:
        raise DomainError(f"loop count must be >= 1, got {m}")
    if not (0.0 <= q < 1.0):
        raise DomainError(f"failure probability must lie in [0, 1), got {q}")
    if n == 1:
        return 1.0
    p_qpc = qpc_success_closed(shape, eta_loop)
    if p_qpc <= 0.0:
        return 0.0
    log_p = math.log(p_qpc)
    log_r = (n - 1) * math.log(qpc_no_loss_success(shape.b))
    log_r += 2 * m * (n - 1) * log_p
    log_r += (n - 1) * log_expect_pow_wait(math.exp(m * log_p), q)
    return math.exp(log_r)
