import math

import pytest

from loopqr import chain
from loopqr.errors import DomainError
from loopqr.models import GkpCode, QpcCode, RepeaterConfig, SteaneGkpCode


def test_derive_link_example():
    link = chain.derive_link(RepeaterConfig(length_km=1000.0, n=10))
    assert link.p == pytest.approx(0.5 * 0.99**2 * math.exp(-100.0 / 22.0), rel=1e-14)
    assert link.p == pytest.approx(0.0052, rel=0.01)
    assert link.q == pytest.approx(1.0 - link.p)
    assert link.tau0 == pytest.approx(5e-4, rel=1e-14)
    assert link.eta_total == pytest.approx(math.exp(-1000.0 / 22.0), rel=1e-14)


def test_derive_link_loop_transmissivity():
    link = chain.derive_link(RepeaterConfig(length_km=1000.0, n=20, m=50))
    assert link.eta_loop == pytest.approx(0.99 * math.exp(-50.0 / (50 * 22.0)), rel=1e-14)


def test_many_segments_leave_only_detector_and_coupling_losses():
    link = chain.derive_link(RepeaterConfig(length_km=1.0, n=10**6))
    assert link.p == pytest.approx(0.5 * 0.99**2, rel=1e-6)


def test_raw_rate_matches_published_values():
    short = chain.secret_key_rate(RepeaterConfig(length_km=1000.0, n=10), GkpCode(30.0))
    assert short.raw_rate_hz == pytest.approx(3.5, rel=0.05)
    far = chain.secret_key_rate(RepeaterConfig(length_km=10_000.0, n=100), GkpCode(30.0))
    assert far.raw_rate_hz == pytest.approx(2.0, rel=0.10)


def test_raw_rate_does_not_depend_on_code_or_m(long_chain):
    rates = {
        chain.secret_key_rate(long_chain, code).raw_rate_hz
        for code in (GkpCode(18.0), SteaneGkpCode(14.0), QpcCode(a=5, b=21))
    }
    assert len(rates) == 1
    looped = RepeaterConfig(length_km=1000.0, n=100, m=40)
    assert chain.secret_key_rate(looped, GkpCode(18.0)).raw_rate_hz in rates


def test_zero_noise_key_rate_equals_raw_rate(zero_noise):
    config, code = zero_noise
    rate = chain.secret_key_rate(config, code)
    assert rate.epsilon == 0.0
    assert rate.skf == 1.0
    assert rate.skr_hz == rate.raw_rate_hz


def test_secret_key_rate_breakdown():
    rate = chain.secret_key_rate(RepeaterConfig(length_km=1000.0, n=100, m=100), GkpCode(18.0))
    assert rate.code == "gkp(s=18dB)"
    assert 0.0 < rate.skf < 1.0
    assert rate.skr_hz == pytest.approx(rate.skf * rate.raw_rate_hz)
    assert rate.skf == pytest.approx(1.0 - 2.0 * _h(rate.epsilon), rel=1e-12)
    for key in ("p", "q", "eta_loop", "tau0", "eta_total", "delta2", "p_corr", "p_swap", "p_stategen"):
        assert key in rate.diagnostics


def _h(x):
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def test_negative_fraction_is_clamped():
    rate = chain.secret_key_rate(RepeaterConfig(length_km=1000.0, n=100, m=100), GkpCode(10.0))
    assert rate.skf == 0.0
    assert rate.skr_hz == 0.0
    assert rate.skf_unclamped < 0.0


def test_qpc_breakdown_has_no_pauli_errors(long_chain):
    rate = chain.secret_key_rate(long_chain, QpcCode(a=5, b=21))
    assert rate.epsilon == 0.0
    assert rate.code == "qpc(b=21,a=5)"
    assert rate.diagnostics["swap_factor"] == pytest.approx(1.0 - 2.0**-21)
    assert 0.0 < rate.diagnostics["p_qpc"] < 1.0


def test_single_segment_has_perfect_key():
    rate = chain.secret_key_rate(RepeaterConfig(length_km=50.0, n=1), GkpCode(5.0))
    assert rate.epsilon == 0.0
    assert rate.skf == 1.0


def test_loop_coherence_time():
    assert chain.loop_coherence_time(RepeaterConfig(length_km=100.0, n=2)) == pytest.approx(1.1e-4, rel=1e-12)


def test_plob_bound():
    assert chain.plob_bound(0.5) == pytest.approx(1.0, rel=1e-15)
    assert chain.plob_bound(0.0) == 0.0
    small = math.exp(-1000.0 / 22.0)
    assert chain.plob_bound(small) == pytest.approx(small / math.log(2.0), rel=1e-12)
    with pytest.raises(DomainError):
        chain.plob_bound(1.0)


def test_unencoded_bound():
    single = RepeaterConfig(length_km=100.0, n=1)
    assert chain.unencoded_upper_bound(single) == 1.0
    two = RepeaterConfig(length_km=100.0, n=2)
    assert chain.unencoded_upper_bound(two) == pytest.approx(math.exp(-100.0 / 22.0))
    for n in (3, 10, 100):
        config = RepeaterConfig(length_km=100.0, n=n)
        assert chain.unencoded_upper_bound(config) < math.exp(-100.0 / 22.0)


def test_long_segments_with_q_rounding_to_one():
    config = RepeaterConfig(length_km=10_000.0, n=10)
    link = chain.derive_link(config)
    assert link.q == 1.0
    for code in (GkpCode(18.0), SteaneGkpCode(18.0), QpcCode(a=5, b=21)):
        rate = chain.secret_key_rate(config, code)
        assert 0.0 < rate.raw_rate_hz < 1e-15
        assert rate.skf == 0.0
        assert rate.skr_hz == 0.0
    assert chain.secret_key_rate(config, GkpCode(18.0)).epsilon == 0.5


def test_two_long_segments_use_the_harmonic_limit():
    config = RepeaterConfig(length_km=1000.0, n=2)
    link = chain.derive_link(config)
    assert link.p == pytest.approx(6.6e-11, rel=0.05)
    rate = chain.secret_key_rate(config, GkpCode(18.0))
    lam = -math.log1p(-link.p)
    assert rate.raw_rate_hz == pytest.approx(1.0 / (link.tau0 * (1.5 / lam + 0.5)), rel=1e-12)
    assert 0.0 <= rate.skf <= 1.0
    assert 0.0 <= rate.epsilon <= 0.5


def test_single_segment_beyond_double_resolution():
    rate = chain.secret_key_rate(RepeaterConfig(length_km=1000.0, n=1), GkpCode(10.0))
    assert rate.epsilon == 0.0
    assert rate.skf == 1.0
    assert rate.raw_rate_hz > 0.0
