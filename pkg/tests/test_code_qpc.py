import math

import pytest

from loopqr import code_qpc
from loopqr.code_qpc import QpcShape
from loopqr.errors import DomainError

ETAS = [i / 10.0 for i in range(11)]


@pytest.mark.parametrize("a", range(1, 7))
@pytest.mark.parametrize("b", range(1, 7))
def test_closed_form_matches_loss_count_sum(a, b):
    shape = QpcShape(a, b)
    for eta in ETAS:
        assert code_qpc.qpc_success_closed(shape, eta) == pytest.approx(
            code_qpc.qpc_success_sum(shape, eta), abs=1e-12
        )


@pytest.mark.parametrize("eta", ETAS)
def test_single_photon_code_is_half_the_transmission(eta):
    assert code_qpc.qpc_success_closed(QpcShape(1, 1), eta) == pytest.approx(eta / 2.0, abs=1e-15)


@pytest.mark.parametrize("b", [1, 2, 5, 31])
def test_lossless_success_is_bell_index_limit(b):
    expected = 1.0 - 2.0**-b
    assert code_qpc.qpc_success_closed(QpcShape(3, b), 1.0) == pytest.approx(expected, rel=1e-15)
    assert code_qpc.qpc_no_loss_success(b) == pytest.approx(expected, rel=1e-15)


def test_success_given_losses_examples():
    shape = QpcShape(2, 2)
    assert code_qpc.qpc_success_given_losses(shape, 0) == pytest.approx(0.75)
    assert code_qpc.qpc_success_given_losses(shape, 1) == pytest.approx(0.5)
    # Two losses either empty a block or damage both: no intact block left.
    assert code_qpc.qpc_success_given_losses(shape, 2) == 0.0
    with pytest.raises(DomainError):
        code_qpc.qpc_success_given_losses(shape, 5)


def test_total_loss_never_succeeds():
    assert code_qpc.qpc_success_closed(QpcShape(5, 21), 0.0) == 0.0
    assert code_qpc.qpc_success_sum(QpcShape(4, 4), 0.0) == 0.0


def test_success_grows_with_transmission():
    shape = QpcShape(5, 21)
    values = [code_qpc.qpc_success_closed(shape, eta) for eta in ETAS]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_shape_validation():
    with pytest.raises(DomainError):
        QpcShape(0, 3)
    with pytest.raises(DomainError):
        QpcShape(3, 0)
    with pytest.raises(DomainError):
        QpcShape(20, 31)
    assert QpcShape(20, 31, max_photons=620).photons == 620
    with pytest.raises(DomainError):
        code_qpc.qpc_success_sum(QpcShape(12, 12), 0.5)


def test_skf_qpc_single_segment_is_one():
    assert code_qpc.skf_qpc(QpcShape(5, 21), 1, 10, 0.9, 0.5) == 1.0


def test_skf_qpc_lossless_single_photon_code():
    # (1 - 1/2)^(n-1) from Bell indices times p_QPC^{2m(n-1)} with no waiting (q = 0).
    value = code_qpc.skf_qpc(QpcShape(1, 1), 3, 1, 0.0, 1.0)
    assert value == pytest.approx(0.25 * 0.5**4, rel=1e-14)


def test_skf_qpc_decreases_with_n_and_m():
    shape = QpcShape(5, 31)
    eta = math.exp(-0.01)
    by_n = [code_qpc.skf_qpc(shape, n, 10, 0.7, eta) for n in (2, 10, 50, 200)]
    by_m = [code_qpc.skf_qpc(shape, 20, m, 0.7, eta) for m in (1, 10, 100)]
    assert all(b <= a for a, b in zip(by_n, by_n[1:]))
    assert all(b <= a for a, b in zip(by_m, by_m[1:]))
    assert all(0.0 < v <= 1.0 for v in by_n + by_m)


def test_skf_qpc_zero_transmission_gives_no_key():
    assert code_qpc.skf_qpc(QpcShape(2, 2), 5, 3, 0.5, 0.0) == 0.0
