from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

from .code_gkp import StategenMode
from .errors import ConfigError

DEFAULT_ATT_LENGTH_KM = 22.0
DEFAULT_C_FIBER = 2e8
DEFAULT_P_LINK = 0.99
DEFAULT_P_LOOP = 0.99
DEFAULT_P_BSM = 0.5

# Config-file key -> RepeaterConfig attribute.
CHAIN_KEYS = {
    "L": "length_km",
    "n": "n",
    "m": "m",
    "L_att": "att_length_km",
    "c_fiber": "c_fiber",
    "p_link": "p_link",
    "p_loop": "p_loop",
    "p_bsm": "p_bsm",
}


def as_float(name: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        # PyYAML reads "1e-05" (no dot in the mantissa) as a string.
        try:
            return float(value.strip())
        except ValueError:
            pass
    raise ConfigError(name, f"expected a number, got {value!r}")


def as_int(name: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    number = as_float(name, value)
    if not number.is_integer():
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return int(number)


def _check_keys(section: str, mapping: Mapping[str, Any], allowed: set[str]) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"{section}.{unknown[0]}", "unknown key")


def _check_probability(name: str, value: float) -> None:
    if not (0.0 < value <= 1.0):
        raise ConfigError(name, f"must lie in (0, 1], got {value}")


@dataclass(frozen=True)
class RepeaterConfig:
    """A repeater chain; distances in km, velocity in m/s."""

    length_km: float
    n: int
    m: int = 1
    att_length_km: float = DEFAULT_ATT_LENGTH_KM
    c_fiber: float = DEFAULT_C_FIBER
    p_link: float = DEFAULT_P_LINK
    p_loop: float = DEFAULT_P_LOOP
    p_bsm: float = DEFAULT_P_BSM

    def __post_init__(self) -> None:
        if not (math.isfinite(self.length_km) and self.length_km > 0.0):
            raise ConfigError("L", f"must be a positive distance, got {self.length_km}")
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ConfigError("n", f"must be an integer >= 1, got {self.n!r}")
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise ConfigError("m", f"must be an integer >= 1, got {self.m!r}")
        if not self.att_length_km > 0.0:
            raise ConfigError("L_att", f"must be positive, got {self.att_length_km}")
        if not (math.isfinite(self.c_fiber) and self.c_fiber > 0.0):
            raise ConfigError("c_fiber", f"must be a positive velocity, got {self.c_fiber}")
        _check_probability("p_link", self.p_link)
        _check_probability("p_loop", self.p_loop)
        _check_probability("p_bsm", self.p_bsm)

    @property
    def segment_km(self) -> float:
        return self.length_km / self.n

    @property
    def loop_km(self) -> float:
        return self.segment_km / self.m

    def to_dict(self) -> dict[str, Any]:
        return {key: getattr(self, attr) for key, attr in CHAIN_KEYS.items()}

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RepeaterConfig":
        _check_keys("chain", mapping, set(CHAIN_KEYS))
        for required in ("L", "n"):
            if mapping.get(required) is None:
                raise ConfigError(required, "is required")
        kwargs: dict[str, Any] = {}
        for key, attr in CHAIN_KEYS.items():
            value = mapping.get(key)
            if value is None:
                continue
            kwargs[attr] = as_int(key, value) if key in ("n", "m") else as_float(key, value)
        return cls(**kwargs)


def _check_squeezing(s_db: float) -> None:
    if math.isnan(s_db) or s_db == -math.inf:
        raise ConfigError("code.s", f"squeezing must be finite or +inf, got {s_db}")


@dataclass(frozen=True)
class GkpCode:
    s_db: float
    family: str = field(default="gkp", init=False)

    def __post_init__(self) -> None:
        _check_squeezing(self.s_db)

    @property
    def label(self) -> str:
        return f"gkp(s={self.s_db:g}dB)"

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "s": self.s_db}


@dataclass(frozen=True)
class SteaneGkpCode:
    s_db: float
    stategen_mode: StategenMode = StategenMode.BARE
    family: str = field(default="steane", init=False)

    def __post_init__(self) -> None:
        _check_squeezing(self.s_db)
        try:
            object.__setattr__(self, "stategen_mode", StategenMode(self.stategen_mode))
        except ValueError:
            raise ConfigError(
                "code.stategen",
                f"must be one of {[mode.value for mode in StategenMode]}, got {self.stategen_mode!r}",
            ) from None

    @property
    def label(self) -> str:
        return f"steane(s={self.s_db:g}dB)"

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "s": self.s_db, "stategen": self.stategen_mode.value}


@dataclass(frozen=True)
class QpcCode:
    a: int
    b: int
    family: str = field(default="qpc", init=False)

    def __post_init__(self) -> None:
        if isinstance(self.a, bool) or not isinstance(self.a, int) or self.a < 1:
            raise ConfigError("code.a", f"must be an integer >= 1, got {self.a!r}")
        if isinstance(self.b, bool) or not isinstance(self.b, int) or self.b < 1:
            raise ConfigError("code.b", f"must be an integer >= 1, got {self.b!r}")

    @property
    def label(self) -> str:
        return f"qpc(b={self.b},a={self.a})"

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "a": self.a, "b": self.b}


CodeSpec = Union[GkpCode, SteaneGkpCode, QpcCode]

CODE_FAMILIES = ("gkp", "steane", "qpc")
_CODE_KEYS = {
    "gkp": {"family", "s"},
    "steane": {"family", "s", "stategen"},
    "qpc": {"family", "a", "b"},
}


def code_from_mapping(mapping: Mapping[str, Any]) -> CodeSpec:
    family = str(mapping.get("family", "")).strip().lower()
    if family not in CODE_FAMILIES:
        raise ConfigError("code.family", f"unknown code {mapping.get('family')!r}; expected one of {CODE_FAMILIES}")
    _check_keys("code", mapping, _CODE_KEYS[family])
    if family == "qpc":
        for key in ("a", "b"):
            if mapping.get(key) is None:
                raise ConfigError(f"code.{key}", "is required for qpc")
        return QpcCode(a=as_int("code.a", mapping["a"]), b=as_int("code.b", mapping["b"]))
    if mapping.get("s") is None:
        raise ConfigError("code.s", f"is required for {family}")
    s_db = as_float("code.s", mapping["s"])
    if family == "gkp":
        return GkpCode(s_db)
    return SteaneGkpCode(s_db, mapping.get("stategen") or StategenMode.BARE)


@dataclass(frozen=True)
class DerivedLink:
    p: float
    q: float
    eta_loop: float
    tau0: float
    eta_total: float

    def to_dict(self) -> dict[str, float]:
        return {
            "p": self.p,
            "q": self.q,
            "eta_loop": self.eta_loop,
            "tau0": self.tau0,
            "eta_total": self.eta_total,
        }


@dataclass(frozen=True)
class RateBreakdown:
    code: str
    raw_rate_hz: float
    skf: float
    skr_hz: float
    epsilon: float
    skf_unclamped: float
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "raw_rate_hz": self.raw_rate_hz,
            "skf": self.skf,
            "skr_hz": self.skr_hz,
            "epsilon": self.epsilon,
            "skf_unclamped": self.skf_unclamped,
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RateBreakdown":
        return cls(
            code=str(mapping["code"]),
            raw_rate_hz=as_float("raw_rate_hz", mapping["raw_rate_hz"]),
            skf=as_float("skf", mapping["skf"]),
            skr_hz=as_float("skr_hz", mapping["skr_hz"]),
            epsilon=as_float("epsilon", mapping["epsilon"]),
            skf_unclamped=as_float("skf_unclamped", mapping["skf_unclamped"]),
            diagnostics={
                str(k): as_float(f"diagnostics.{k}", v)
                for k, v in (mapping.get("diagnostics") or {}).items()
            },
        )
