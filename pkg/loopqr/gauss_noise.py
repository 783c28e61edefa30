"""Gaussian shift-noise bookkeeping for square-lattice GKP qubits.

Variances are in the vacuum-unit convention fixed by s = -10 log10(2 delta^2).
A logical X error happens when the true shift lands in an odd stripe
[(2k+1)sqrt(pi) - sqrt(pi)/2, (2k+1)sqrt(pi) + sqrt(pi)/2].
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)

# Largest stripe mass we allow the truncated sum to drop.
STRIPE_TAIL_TOL = 1e-15
# Above this variance the odd-stripe mass is 1/2 to within (2/pi) e^{-pi sigma^2 / 2},
# far below double resolution.
STRIPE_FLAT_SIGMA2 = 30.0


def squeezing_to_variance(s_db: float) -> float:
    """delta^2 = 10^(-s/10) / 2; s = +inf is the ideal (noiseless) state."""
    if math.isnan(s_db) or s_db == -math.inf:
        raise DomainError(f"squeezing must be finite or +inf, got {s_db}")
    return 10.0 ** (-s_db / 10.0) / 2.0


def variance_to_squeezing(delta2: float) -> float:
    if not delta2 > 0.0:
        raise DomainError(f"variance must be positive to express in dB, got {delta2}")
    return -10.0 * math.log10(2.0 * delta2)


def _check_eta(eta: float) -> None:
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")


def loss_to_shift_variance(eta: float) -> float:
    """Preamplified loss channel -> shift channel with variance 1 - eta."""
    _check_eta(eta)
    return 1.0 - eta


def cc_shift_variance(eta: float) -> float:
    """Variance left after CC amplification with matched loss on both modes."""
    _check_eta(eta)
    if eta == 0.0:
        raise DomainError("CC-amplified variance diverges at eta = 0")
    return (1.0 - eta) / eta


def total_correction_variance(delta2: float, eta_loop: float) -> float:
    """sigma^2_tot for one loop teleportation: loop shift plus both finite-squeezing modes."""
    if delta2 < 0.0:
        raise DomainError(f"variance must be nonnegative, got {delta2}")
    return loss_to_shift_variance(eta_loop) + 2.0 * delta2


def stripe_kmax(sigma2_tot: float) -> int:
    return max(3, math.ceil(6.0 * math.sqrt(sigma2_tot) / SQRT_PI))


def stripe_error_prob(sigma2_tot: float) -> float:
    """Gaussian mass over the odd stripes.

    The stripes for k and -k-1 mirror each other, so the sum runs over the
    positive half and doubles it. Each stripe is an erfc difference of upper
    tails, which keeps small probabilities at full relative precision.
    """
    if math.isnan(sigma2_tot) or sigma2_tot < 0.0:
        raise DomainError(f"shift variance must be nonnegative, got {sigma2_tot}")
    if sigma2_tot == 0.0:
        return 0.0
    if sigma2_tot >= STRIPE_FLAT_SIGMA2:
        return 0.5
    scale = math.sqrt(2.0 * sigma2_tot)
    k_max = stripe_kmax(sigma2_tot)
    k = np.arange(k_max + 1, dtype=np.float64)
    lower = (2.0 * k + 0.5) * SQRT_PI / scale
    upper = (2.0 * k + 1.5) * SQRT_PI / scale
    # 2 * (1/2) * [erfc(lower) - erfc(upper)]
    stripes = erfc(lower) - erfc(upper)
    tail = float(erfc((2.0 * k_max + 2.5) * SQRT_PI / scale))
    if tail >= STRIPE_TAIL_TOL:
        raise DomainError(f"stripe sum truncation tail {tail:.3e} exceeds tolerance")
    return min(0.5, math.fsum(stripes))
