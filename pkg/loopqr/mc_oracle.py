"""Monte Carlo estimators for the waiting-time sums, the raw rate and the QBER.

Every run is reproducible from (seed, samples, workers, chunk_elements):
the seed is split into one Philox stream per worker with SeedSequence.spawn
and the per-stream moments are reduced in stream order.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .code_gkp import GkpElementaryProbs, StategenMode, qber_gkp, qber_steane, steane_level_probs
from .env import DEFAULT_SEED
from .errors import ConfigError, DomainError
from .geom_stats import expect_pow_dsum, raw_rate

log = logging.getLogger("loopqr.mc_oracle")

# Below this many events the parity is drawn from its exact Bernoulli law.
EXACT_PARITY_MAX_EVENTS = 1000

Sampler = Callable[[np.random.Generator, int], np.ndarray]


class DependenceModel(str, enum.Enum):
    INDEPENDENT = "independent"
    CHAIN = "chain"


class CodeLevel(str, enum.Enum):
    BARE = "bare"
    STEANE = "steane"


@dataclass(frozen=True)
class McSettings:
    samples: int = 1_000_000
    seed: int = DEFAULT_SEED
    model: DependenceModel = DependenceModel.INDEPENDENT
    workers: int = 1
    chunk_elements: int = 1 << 20

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ConfigError("samples", f"must be >= 1, got {self.samples}")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers}")
        if self.chunk_elements < 1:
            raise ConfigError("chunk_elements", f"must be >= 1, got {self.chunk_elements}")
        try:
            object.__setattr__(self, "model", DependenceModel(self.model))
        except ValueError:
            raise ConfigError("model", f"unknown dependence model {self.model!r}") from None


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int

    def z_score(self, analytic: float) -> float:
        diff = self.mean - analytic
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def _stream_moments(
    seed: np.random.SeedSequence, count: int, rows: int, sampler: Sampler
) -> tuple[float, float]:
    rng = np.random.Generator(np.random.Philox(seed))
    sums: list[float] = []
    squares: list[float] = []
    remaining = count
    while remaining > 0:
        k = min(rows, remaining)
        values = sampler(rng, k)
        sums.append(float(np.sum(values)))
        squares.append(float(np.sum(values * values)))
        remaining -= k
    return math.fsum(sums), math.fsum(squares)


def _estimate(settings: McSettings, width: int, sampler: Sampler) -> McEstimate:
    """Mean and standard error of sampler's values; width is the draw count per sample."""
    workers = min(settings.workers, settings.samples)
    streams = np.random.SeedSequence(settings.seed).spawn(workers)
    base, extra = divmod(settings.samples, workers)
    counts = [base + (1 if i < extra else 0) for i in range(workers)]
    rows = max(1, settings.chunk_elements // max(1, width))

    if workers == 1:
        moments = [_stream_moments(streams[0], counts[0], rows, sampler)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            moments = list(
                pool.map(lambda args: _stream_moments(*args, rows, sampler), zip(streams, counts))
            )

    n = settings.samples
    mean = math.fsum(s for s, _ in moments) / n
    if n == 1:
        return McEstimate(mean, 0.0, n)
    second = math.fsum(sq for _, sq in moments) / n
    variance = max(0.0, (second - mean * mean) * n / (n - 1))
    return McEstimate(mean, math.sqrt(variance / n), n)


def sample_geometric(rng: np.random.Generator, q: float, size) -> np.ndarray:
    """Attempt counts from 1, by inverse CDF: ceil(log(1 - U) / log q)."""
    if q == 0.0:
        return np.ones(size, dtype=np.int64)
    u = rng.random(size)
    attempts = np.ceil(np.log1p(-u) / math.log(q))
    return np.maximum(attempts, 1.0).astype(np.int64)


def sample_dsum(
    rng: np.random.Generator, q: float, n: int, k: int, model: DependenceModel
) -> np.ndarray:
    """k draws of D_n under the given dependence model."""
    if n == 1:
        return np.zeros(k, dtype=np.int64)
    if model is DependenceModel.CHAIN:
        attempts = sample_geometric(rng, q, (k, n))
        return np.abs(np.diff(attempts, axis=1)).sum(axis=1)
    attempts = sample_geometric(rng, q, (k, 2 * (n - 1)))
    return np.abs(attempts[:, 0::2] - attempts[:, 1::2]).sum(axis=1)


def _dsum_width(n: int, model: DependenceModel) -> int:
    return n if model is DependenceModel.CHAIN else 2 * max(1, n - 1)


def _check_inputs(q: float, n: int) -> None:
    if not (0.0 <= q < 1.0):
        raise DomainError(f"failure probability must lie in [0, 1), got {q}")
    if n < 1:
        raise DomainError(f"segment count must be >= 1, got {n}")


def mc_expect_pow_dsum(a: float, q: float, n: int, settings: McSettings) -> McEstimate:
    _check_inputs(q, n)
    if not (-1.0 <= a <= 1.0):
        raise DomainError(f"base must lie in [-1, 1], got {a}")
    if q == 0.0 or n == 1:
        return McEstimate(1.0, 0.0, settings.samples)

    def sampler(rng: np.random.Generator, k: int) -> np.ndarray:
        return np.power(a, sample_dsum(rng, q, n, k, settings.model).astype(np.float64))

    estimate = _estimate(settings, _dsum_width(n, settings.model), sampler)
    log.debug("E(a^D) a=%s q=%s n=%d model=%s: %s", a, q, n, settings.model.value, estimate)
    return estimate


def mc_raw_rate(n: int, p: float, tau0: float, settings: McSettings) -> McEstimate:
    """1 / (tau0 E[max]) with a delta-method standard error."""
    if not (0.0 < p <= 1.0):
        raise DomainError(f"success probability must lie in (0, 1], got {p}")
    if tau0 <= 0.0:
        raise DomainError(f"signaling period must be positive, got {tau0}")
    q = 1.0 - p
    _check_inputs(q, n)

    def sampler(rng: np.random.Generator, k: int) -> np.ndarray:
        return sample_geometric(rng, q, (k, n)).max(axis=1).astype(np.float64)

    attempts = _estimate(settings, n, sampler)
    rate = 1.0 / (tau0 * attempts.mean)
    return McEstimate(rate, attempts.std_error / (tau0 * attempts.mean**2), attempts.samples)


def _odd_flips(rng: np.random.Generator, events: np.ndarray, p: float) -> np.ndarray:
    """Whether an odd number of the `events` independent flips (probability p) happened."""
    if p == 0.0:
        return np.zeros(events.shape, dtype=bool)
    counts = events.astype(np.float64)
    if p < 0.5:
        odd_prob = -0.5 * np.expm1(counts * math.log1p(-2.0 * p))
    else:
        odd_prob = 0.5 * (1.0 - np.power(1.0 - 2.0 * p, counts))
    odd = rng.random(events.shape) < odd_prob
    many = events >= EXACT_PARITY_MAX_EVENTS
    if np.any(many):
        odd[many] = (rng.binomial(events[many], p) & 1).astype(bool)
    return odd


def mc_qber(
    probs: GkpElementaryProbs,
    n: int,
    m: int,
    q: float,
    code_level: CodeLevel | str,
    settings: McSettings,
    stategen_mode: StategenMode = StategenMode.BARE,
) -> McEstimate:
    """Frequency of an odd total flip count over corrections, state generations and swaps."""
    _check_inputs(q, n)
    if m < 1:
        raise DomainError(f"loop count must be >= 1, got {m}")
    level = CodeLevel(code_level)
    if level is CodeLevel.STEANE:
        p_corr, p_swap, p_stategen = steane_level_probs(probs, stategen_mode)
    else:
        p_corr, p_swap, p_stategen = probs.p_corr, probs.p_swap, 0.0
    if n == 1:
        return McEstimate(0.0, 0.0, settings.samples)

    def sampler(rng: np.random.Generator, k: int) -> np.ndarray:
        corrections = m * sample_dsum(rng, q, n, k, settings.model) + 2 * m * (n - 1)
        stategens = corrections + 2 * (n - 1)
        swaps = np.full(k, n - 1, dtype=np.int64)
        odd = _odd_flips(rng, corrections, p_corr)
        odd ^= _odd_flips(rng, stategens, p_stategen)
        odd ^= _odd_flips(rng, swaps, p_swap)
        return odd.astype(np.float64)

    estimate = _estimate(settings, _dsum_width(n, settings.model), sampler)
    log.debug("QBER %s n=%d m=%d q=%s: %s", level.value, n, m, q, estimate)
    return estimate


def approximation_gap(a: float, q: float, n: int, settings: McSettings) -> McEstimate:
    """Chain-model E(a^D) minus the independent-stations closed form."""
    chain = mc_expect_pow_dsum(a, q, n, dataclasses.replace(settings, model=DependenceModel.CHAIN))
    return McEstimate(chain.mean - expect_pow_dsum(a, q, n), chain.std_error, chain.samples)


# (a, q, n) for E(a^D_n); (n, p, tau0) for the raw rate.
DSUM_GRID = ((0.99, 0.9, 5), (0.5, 0.5, 3), (0.9, 0.7, 10), (-0.5, 0.6, 6), (0.7, 0.0, 4))
RAW_RATE_GRID = tuple((n, p, 1.0) for n in (2, 10, 100) for p in (0.9, 0.1, 0.005)) + ((10, 0.0052, 5e-4),)
# (probs, n, m, q)
QBER_GKP_CASE = (GkpElementaryProbs(1e-3, 1e-4), 10, 20, 0.99)
QBER_STEANE_CASE = (GkpElementaryProbs(0.016, 0.01, 0.01), 5, 5, 0.5)


@dataclass(frozen=True)
class ValidationRow:
    quantity: str
    model: str
    analytic: float
    estimate: McEstimate
    kind: str  # "check" fails the suite past the z limit, "gap" is reported only

    @property
    def z(self) -> float:
        return self.estimate.z_score(self.analytic)

    def to_record(self) -> dict[str, object]:
        return {
            "quantity": self.quantity,
            "model": self.model,
            "analytic": self.analytic,
            "mc_mean": self.estimate.mean,
            "mc_stderr": self.estimate.std_error,
            "z": self.z,
            "kind": self.kind,
        }


def run_validation_suite(settings: McSettings) -> list[ValidationRow]:
    """Every analytic path against its oracle (independent model), plus chain-model gaps."""
    independent = dataclasses.replace(settings, model=DependenceModel.INDEPENDENT)
    chain = dataclasses.replace(settings, model=DependenceModel.CHAIN)
    rows: list[ValidationRow] = []

    for a, q, n in DSUM_GRID:
        rows.append(
            ValidationRow(
                f"expect_pow_dsum(a={a},q={q},n={n})",
                independent.model.value,
                expect_pow_dsum(a, q, n),
                mc_expect_pow_dsum(a, q, n, independent),
                "check",
            )
        )
    for n, p, tau0 in RAW_RATE_GRID:
        rows.append(
            ValidationRow(
                f"raw_rate(n={n},p={p},tau0={tau0})",
                independent.model.value,
                raw_rate(n, p, tau0),
                mc_raw_rate(n, p, tau0, independent),
                "check",
            )
        )

    probs, n, m, q = QBER_GKP_CASE
    gkp_analytic = qber_gkp(probs, n, m, q)
    gkp_label = f"qber_gkp(p_corr={probs.p_corr},p_swap={probs.p_swap},n={n},m={m},q={q})"
    rows.append(
        ValidationRow(gkp_label, independent.model.value, gkp_analytic,
                      mc_qber(probs, n, m, q, CodeLevel.BARE, independent), "check")
    )
    probs_s, n_s, m_s, q_s = QBER_STEANE_CASE
    for mode in StategenMode:
        rows.append(
            ValidationRow(
                f"qber_steane(p_corr={probs_s.p_corr},p_swap={probs_s.p_swap},"
                f"p_stategen={probs_s.p_stategen},n={n_s},m={m_s},q={q_s},stategen={mode.value})",
                independent.model.value,
                qber_steane(probs_s, n_s, m_s, q_s, mode),
                mc_qber(probs_s, n_s, m_s, q_s, CodeLevel.STEANE, independent, mode),
                "check",
            )
        )

    a, q_gap, n_gap = DSUM_GRID[0]
    rows.append(
        ValidationRow(
            f"expect_pow_dsum(a={a},q={q_gap},n={n_gap})",
            chain.model.value,
            expect_pow_dsum(a, q_gap, n_gap),
            mc_expect_pow_dsum(a, q_gap, n_gap, chain),
            "gap",
        )
    )
    rows.append(
        ValidationRow(gkp_label, chain.model.value, gkp_analytic,
                      mc_qber(probs, n, m, q, CodeLevel.BARE, chain), "gap")
    )
    log.info("validation suite: %d rows at %d samples (seed %d)", len(rows), settings.samples, settings.seed)
    return rows
