"""Parameter exploration: m optimization, n-m grids, squeezing thresholds, distance curves."""
from __future__ import annotations

import dataclasses
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from .chain import secret_key_rate
from .code_gkp import StategenMode
from .code_qpc import DEFAULT_MAX_PHOTONS
from .errors import ConfigError, DomainError, ThresholdNotFound
from .models import CodeSpec, GkpCode, QpcCode, RateBreakdown, RepeaterConfig, SteaneGkpCode

log = logging.getLogger("loopqr.sweep")

DEFAULT_M_RANGE = (1, 2000)
# Ranges up to this size are scanned exhaustively; larger ones are zoomed.
EXHAUSTIVE_M_LIMIT = 5000
M_ZOOM_POINTS = 256
SQUEEZING_BRACKET_DB = (5.0, 30.0)
SQUEEZING_RESOLUTION_DB = 0.1
QPC_A_RANGE = (2, 10)
MONOTONE_ATOL = 1e-12

# Axis name -> RepeaterConfig attribute.
AXIS_ATTRS = {"n": "n", "m": "m", "L": "length_km"}
INTEGER_AXES = ("n", "m")

T = TypeVar("T")
R = TypeVar("R")


def _normalize(name: str, values: Iterable[Any]) -> tuple:
    if name in INTEGER_AXES:
        out: list = []
        for value in values:
            number = int(round(float(value)))
            if not out or out[-1] != number:
                out.append(number)
        return tuple(out)
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    def __post_init__(self) -> None:
        if self.name not in AXIS_ATTRS:
            raise ConfigError(f"sweep.{self.name}", f"unknown axis; expected one of {sorted(AXIS_ATTRS)}")
        object.__setattr__(self, "values", _normalize(self.name, self.values))
        if not self.values:
            raise ConfigError(f"sweep.{self.name}", "axis has no values")
        steps = np.diff(np.asarray(self.values, dtype=np.float64))
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigError(f"sweep.{self.name}", "axis values must be strictly monotone")

    @classmethod
    def linear(cls, name: str, start: float, stop: float, num: int) -> "Axis":
        return cls(name, tuple(np.linspace(start, stop, num)))

    @classmethod
    def log(cls, name: str, start: float, stop: float, num: int) -> "Axis":
        if start <= 0 or stop <= 0:
            raise ConfigError(f"sweep.{name}", "log axis needs positive end points")
        return cls(name, tuple(np.geomspace(start, stop, num)))

    @classmethod
    def integer_log(cls, name: str, start: int, stop: int, num: int) -> "Axis":
        """Log-spaced integers; rounding duplicates are dropped, so len <= num."""
        if start < 1 or stop < 1:
            raise ConfigError(f"sweep.{name}", "integer log axis needs end points >= 1")
        return cls(name, tuple(np.unique(np.rint(np.geomspace(start, stop, num)).astype(np.int64))))

    @classmethod
    def parse(cls, name: str, text: str) -> "Axis":
        """A comma list ("10,20,50") or a range "start:stop:num[:log]"."""
        text = text.strip()
        try:
            if ":" not in text:
                return cls(name, tuple(float(part) for part in text.split(",") if part.strip()))
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3].strip() != "log"):
                raise ValueError(text)
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"sweep.{name}", f"cannot parse axis {text!r}") from None
        if num < 1:
            raise ConfigError(f"sweep.{name}", f"axis needs at least one point, got {num}")
        if len(parts) == 4:
            if name in INTEGER_AXES:
                return cls.integer_log(name, int(start), int(stop), num)
            return cls.log(name, start, stop, num)
        return cls.linear(name, start, stop, num)


@dataclass(frozen=True)
class SweepGrid:
    config: RepeaterConfig
    code: CodeSpec
    axes: tuple[Axis, ...]

    def __post_init__(self) -> None:
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError("sweep", f"duplicate axes {names}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(axis.values) for axis in self.axes)

    def cells(self) -> list[RepeaterConfig]:
        """One config per cell; the first axis varies slowest."""
        attrs = [AXIS_ATTRS[axis.name] for axis in self.axes]
        return [
            dataclasses.replace(self.config, **dict(zip(attrs, point)))
            for point in itertools.product(*(axis.values for axis in self.axes))
        ]


@dataclass(frozen=True)
class SweepRow:
    config: RepeaterConfig
    rate: RateBreakdown


@dataclass(frozen=True)
class ThresholdResult:
    parameter: str
    threshold: float
    bracket: tuple[float, float]
    target: str
    level: float
    family: str
    m: int
    rate: RateBreakdown

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameter": self.parameter,
            "threshold": self.threshold,
            "bracket": list(self.bracket),
            "target": self.target,
            "level": self.level,
            "family": self.family,
            "m": self.m,
            "rate": self.rate.to_dict(),
        }


@dataclass(frozen=True)
class NonzeroRegion:
    cells: tuple[tuple[int, int], ...]
    max_segment_km: Optional[float]
    max_n_corner: Optional[tuple[int, int]]
    max_m_corner: Optional[tuple[int, int]]


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """map() that may run in a thread pool; results always follow the input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_m_range(m_range: tuple[int, int]) -> tuple[int, int]:
    lo, hi = int(m_range[0]), int(m_range[1])
    if lo < 1 or hi < lo:
        raise DomainError(f"empty or invalid m range {m_range}")
    return lo, hi


def _argmax_m(config: RepeaterConfig, code: CodeSpec, candidates: Iterable[int]):
    best: Optional[tuple[int, RateBreakdown]] = None
    for m in candidates:
        rate = secret_key_rate(dataclasses.replace(config, m=m), code)
        if best is None or rate.skf > best[1].skf:
            best = (m, rate)
    assert best is not None
    return best


def optimize_m(
    config: RepeaterConfig, code: CodeSpec, m_range: tuple[int, int] = DEFAULT_M_RANGE
) -> tuple[int, RateBreakdown]:
    """Argmax of the SKF over m; ties go to the smaller m."""
    lo, hi = _check_m_range(m_range)
    while hi - lo + 1 > EXHAUSTIVE_M_LIMIT:
        grid = [int(v) for v in np.unique(np.rint(np.geomspace(lo, hi, M_ZOOM_POINTS)))]
        best_m, _ = _argmax_m(config, code, grid)
        i = grid.index(best_m)
        lo, hi = grid[max(0, i - 1)], grid[min(len(grid) - 1, i + 1)]
    return _argmax_m(config, code, range(lo, hi + 1))


def optimize_qpc_a(
    config: RepeaterConfig,
    b: int,
    a_range: tuple[int, int] = QPC_A_RANGE,
    m_range: tuple[int, int] = DEFAULT_M_RANGE,
) -> tuple[int, int, RateBreakdown]:
    """Best photons per block for b blocks, with m optimized for each a."""
    candidates = [a for a in range(a_range[0], a_range[1] + 1) if a * b <= DEFAULT_MAX_PHOTONS]
    if not candidates:
        raise DomainError(f"no a in {a_range} fits {b} blocks within {DEFAULT_MAX_PHOTONS} photons")
    best: Optional[tuple[int, int, RateBreakdown]] = None
    for a in candidates:
        m, rate = optimize_m(config, QpcCode(a=a, b=b), m_range)
        if best is None or rate.skf > best[2].skf:
            best = (a, m, rate)
    assert best is not None
    log.debug("qpc b=%d L=%s n=%d: best a=%d m=%d r=%.6g", b, config.length_km, config.n, *best[:2], best[2].skf)
    return best


def evaluate_grid(grid: SweepGrid, *, workers: int = 1) -> list[SweepRow]:
    cells = grid.cells()
    log.info("evaluating %s grid %s (%d cells, %d workers)", grid.code.label, grid.shape, len(cells), workers)
    rates = ordered_map(lambda cfg: secret_key_rate(cfg, grid.code), cells, workers)
    return [SweepRow(cfg, rate) for cfg, rate in zip(cells, rates)]


def scan_nm(
    config: RepeaterConfig,
    code: CodeSpec,
    n_values: Sequence[int],
    m_values: Sequence[int],
    *,
    workers: int = 1,
) -> list[SweepRow]:
    """SKF over an n x m grid; rows ordered n-major in axis order."""
    grid = SweepGrid(config, code, (Axis("n", tuple(n_values)), Axis("m", tuple(m_values))))
    return evaluate_grid(grid, workers=workers)


def nonzero_region(rows: Sequence[SweepRow]) -> NonzeroRegion:
    """Cells of an n-m scan with r > 0 and the extremal operating points among them."""
    live = [row.config for row in rows if row.rate.skf > 0.0]
    if not live:
        return NonzeroRegion((), None, None, None)
    max_n = max(live, key=lambda c: (c.n, -c.m))
    max_m = max(live, key=lambda c: (c.m, -c.n))
    return NonzeroRegion(
        cells=tuple((c.n, c.m) for c in live),
        max_segment_km=max(c.segment_km for c in live),
        max_n_corner=(max_n.n, max_n.m),
        max_m_corner=(max_m.n, max_m.m),
    )


def distance_curve(
    code: CodeSpec,
    n: int,
    config: RepeaterConfig,
    L_values: Sequence[float],
    *,
    m_range: tuple[int, int] = DEFAULT_M_RANGE,
    optimize_a: bool = False,
    workers: int = 1,
) -> list[SweepRow]:
    """SKF against total distance with m (and for QPC optionally a) optimized per point."""
    axis = Axis("L", tuple(L_values))
    configs = [dataclasses.replace(config, n=n, length_km=L) for L in axis.values]

    def best(cfg: RepeaterConfig) -> SweepRow:
        if optimize_a and isinstance(code, QpcCode):
            _, m, rate = optimize_qpc_a(cfg, code.b, m_range=m_range)
        else:
            m, rate = optimize_m(cfg, code, m_range)
        return SweepRow(dataclasses.replace(cfg, m=m), rate)

    log.info("distance curve %s n=%d over %d distances", code.label, n, len(configs))
    return ordered_map(best, configs, workers)


def code_for_squeezing(
    family: str, s_db: float, stategen_mode: StategenMode = StategenMode.BARE
) -> CodeSpec:
    if family == "gkp":
        return GkpCode(s_db)
    if family == "steane":
        return SteaneGkpCode(s_db, stategen_mode)
    raise ConfigError("code.family", f"squeezing threshold needs gkp or steane, got {family!r}")


def squeezing_threshold(
    family: str,
    config: RepeaterConfig,
    *,
    target_r: float = 0.0,
    bracket: tuple[float, float] = SQUEEZING_BRACKET_DB,
    resolution: float = SQUEEZING_RESOLUTION_DB,
    m_range: tuple[int, int] = DEFAULT_M_RANGE,
    stategen_mode: StategenMode = StategenMode.BARE,
) -> ThresholdResult:
    """Smallest squeezing (to `resolution` dB) whose m-optimized SKF exceeds target_r."""
    if not (0.0 <= target_r < 1.0):
        raise DomainError(f"target SKF must lie in [0, 1), got {target_r}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (lo < hi and resolution > 0.0):
        raise DomainError(f"invalid squeezing bracket {bracket} at resolution {resolution}")
    evaluated: dict[float, float] = {}

    def evaluate(s_db: float) -> tuple[int, RateBreakdown]:
        m, rate = optimize_m(config, code_for_squeezing(family, s_db, stategen_mode), m_range)
        evaluated[s_db] = rate.skf
        ordered = [evaluated[s] for s in sorted(evaluated)]
        if any(later < earlier - MONOTONE_ATOL for earlier, later in zip(ordered, ordered[1:])):
            raise DomainError(f"SKF not monotone in squeezing: {dict(sorted(evaluated.items()))}")
        log.debug("%s s=%.3f dB: m=%d r=%.6g", family, s_db, m, rate.skf)
        return m, rate

    m_hi, rate_hi = evaluate(hi)
    if rate_hi.skf <= target_r:
        raise ThresholdNotFound(
            f"{family} SKF {rate_hi.skf:.3g} does not exceed {target_r} even at {hi} dB",
            bracket=(lo, hi),
            skf_high=rate_hi.skf,
        )
    _, rate_lo = evaluate(lo)
    if rate_lo.skf > target_r:
        raise ThresholdNotFound(
            f"{family} SKF already exceeds {target_r} at the bottom of the bracket ({lo} dB)",
            bracket=(lo, hi),
            skf_low=rate_lo.skf,
            skf_high=rate_hi.skf,
        )
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        m_mid, rate_mid = evaluate(mid)
        if rate_mid.skf > target_r:
            hi, m_hi, rate_hi = mid, m_mid, rate_mid
        else:
            lo = mid
    log.info(
        "%s threshold L=%s n=%d: %.2f dB (bracket %.3f..%.3f, m=%d)",
        family, config.length_km, config.n, hi, lo, hi, m_hi,
    )
    return ThresholdResult(
        parameter="s_db",
        threshold=hi,
        bracket=(lo, hi),
        target="skf",
        level=target_r,
        family=family,
        m=m_hi,
        rate=rate_hi,
    )
