import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from loopqr import gauss_noise
from loopqr.errors import DomainError


@pytest.mark.parametrize(
    "s_db,delta2",
    [(0.0, 0.5), (10.0, 0.05), (15.0, 0.0158113883008), (20.0, 0.005)],
)
def test_squeezing_to_variance(s_db, delta2):
    assert gauss_noise.squeezing_to_variance(s_db) == pytest.approx(delta2, rel=1e-10)
    assert gauss_noise.variance_to_squeezing(delta2) == pytest.approx(s_db, abs=1e-9)


def test_infinite_squeezing_is_noiseless():
    assert gauss_noise.squeezing_to_variance(math.inf) == 0.0
    with pytest.raises(DomainError):
        gauss_noise.squeezing_to_variance(math.nan)


def test_cc_amplification_is_worse_than_preamplification():
    for eta in (0.1, 0.5, 0.9, 0.999):
        assert gauss_noise.cc_shift_variance(eta) > gauss_noise.loss_to_shift_variance(eta)
    assert gauss_noise.loss_to_shift_variance(1.0) == 0.0
    with pytest.raises(DomainError):
        gauss_noise.cc_shift_variance(0.0)


def test_total_correction_variance():
    assert gauss_noise.total_correction_variance(0.01, 0.98) == pytest.approx(0.04)
    with pytest.raises(DomainError):
        gauss_noise.total_correction_variance(0.01, 1.2)


def _stripe_quadrature(sigma2: float) -> float:
    sigma = math.sqrt(sigma2)

    def pdf(x: float) -> float:
        return math.exp(-x * x / (2.0 * sigma2)) / (sigma * math.sqrt(2.0 * math.pi))

    root = gauss_noise.SQRT_PI
    k_last = int(math.ceil(12.0 * sigma / root)) + 3
    parts = []
    for k in range(-k_last - 1, k_last + 1):
        centre = (2 * k + 1) * root
        value, _ = quad(pdf, centre - root / 2.0, centre + root / 2.0, epsabs=1e-15, epsrel=1e-12)
        parts.append(value)
    return math.fsum(parts)


@pytest.mark.parametrize("sigma2", np.logspace(-4, 1, 25).tolist())
def test_stripe_error_prob_matches_quadrature(sigma2):
    assert gauss_noise.stripe_error_prob(sigma2) == pytest.approx(
        _stripe_quadrature(sigma2), abs=1e-10
    )


def test_stripe_error_prob_small_variance_example():
    # sigma^2 = 0.2: essentially the two k = 0 / k = -1 stripes.
    value = gauss_noise.stripe_error_prob(0.2)
    assert value == pytest.approx(_stripe_quadrature(0.2), abs=1e-10)
    assert 0.04 < value < 0.05


def test_stripe_error_prob_is_monotone_and_bounded():
    grid = np.logspace(-4, 1, 200)
    values = [gauss_noise.stripe_error_prob(float(s)) for s in grid]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert all(0.0 <= v < 0.5 for v in values)
    assert gauss_noise.stripe_error_prob(1e4) == pytest.approx(0.5, abs=1e-3)


def test_stripe_error_prob_zero_variance():
    assert gauss_noise.stripe_error_prob(0.0) == 0.0
    with pytest.raises(DomainError):
        gauss_noise.stripe_error_prob(-0.1)


def test_stripe_kmax_covers_six_sigma():
    for sigma2 in (1e-4, 0.2, 10.0):
        k_max = gauss_noise.stripe_kmax(sigma2)
        assert (2 * k_max + 1.5) * gauss_noise.SQRT_PI >= 6.0 * math.sqrt(sigma2)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-20.0, max_value=40.0))
def test_squeezing_round_trip(s_db):
    delta2 = gauss_noise.squeezing_to_variance(s_db)
    assert gauss_noise.variance_to_squeezing(delta2) == pytest.approx(s_db, rel=1e-12, abs=1e-12)
    assert gauss_noise.squeezing_to_variance(gauss_noise.variance_to_squeezing(delta2)) == pytest.approx(
        delta2, rel=1e-12
    )


def test_stripe_error_prob_is_flat_for_huge_variance():
    assert gauss_noise.stripe_error_prob(gauss_noise.STRIPE_FLAT_SIGMA2) == 0.5
    assert gauss_noise.stripe_error_prob(1e12) == 0.5
    assert gauss_noise.stripe_error_prob(1e300) == 0.5
    below = gauss_noise.stripe_error_prob(gauss_noise.STRIPE_FLAT_SIGMA2 * 0.99)
    assert below == pytest.approx(0.5, abs=1e-15)
    assert below <= 0.5
