"""Run configuration: a YAML (or emitted JSON) file plus command-line overrides.

File layout:

    chain: {L: 1000, n: 100, m: 1, L_att: 22, c_fiber: 2.0e8, p_link: 0.99, p_loop: 0.99, p_bsm: 0.5}
    code: {family: steane, s: 16, stategen: transferred}
    sweep: {kind: nm, n_values: "10:1000:20:log", m_values: [1, 10, 100], L_values: ..., m_range: "1:2000", optimize_a: false}
    threshold: {family: gkp, target_r: 0.0, bracket: [5, 30], resolution: 0.1, m_range: [1, 2000]}
    validate: {samples: 1000000, seed: 20240601, workers: 1}

`result`, `rows` and `manifest` are output sections; they are accepted and
ignored so any JSON document the CLI writes loads back as a config.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .env import is_truthy
from .errors import ConfigError
from .models import CodeSpec, RepeaterConfig, as_float, as_int, code_from_mapping
from .sweep import Axis

SECTION_KEYS: dict[str, set[str]] = {
    "chain": {"L", "n", "m", "L_att", "c_fiber", "p_link", "p_loop", "p_bsm"},
    "code": {"family", "s", "stategen", "a", "b"},
    "sweep": {"kind", "n_values", "m_values", "L_values", "m_range", "optimize_a"},
    "threshold": {"family", "stategen", "target_r", "bracket", "resolution", "m_range"},
    "validate": {"samples", "seed", "workers"},
}
OUTPUT_SECTIONS = {"result", "rows", "manifest"}

FileConfig = dict[str, dict[str, Any]]


def load_config_file(path: Optional[Path]) -> FileConfig:
    if path is None:
        return {}
    try:
        with path.open("r", encoding="utf-8") as fh:
            raw = json.load(fh) if path.suffix.lower() == ".json" else yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        raise ConfigError("config", f"{path} must hold a mapping of sections")

    out: FileConfig = {}
    for section, body in raw.items():
        if section in OUTPUT_SECTIONS:
            continue
        if section not in SECTION_KEYS:
            raise ConfigError(str(section), "unknown config section")
        if body is None:
            body = {}
        if not isinstance(body, Mapping):
            raise ConfigError(str(section), "section must be a mapping")
        unknown = sorted(set(body) - SECTION_KEYS[section])
        if unknown:
            raise ConfigError(f"{section}.{unknown[0]}", "unknown key")
        out[section] = dict(body)
    return out


def merged(file_cfg: FileConfig, section: str, overrides: Mapping[str, Any]) -> dict[str, Any]:
    """File section with every non-None override applied on top."""
    values = dict(file_cfg.get(section, {}))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return values


def build_chain(file_cfg: FileConfig, overrides: Mapping[str, Any]) -> RepeaterConfig:
    return RepeaterConfig.from_mapping(merged(file_cfg, "chain", overrides))


def build_code(file_cfg: FileConfig, overrides: Mapping[str, Any]) -> CodeSpec:
    file_code = dict(file_cfg.get("code", {}))
    family = overrides.get("family")
    if family is not None and str(file_code.get("family", "")).strip().lower() != family:
        # A different family on the command line replaces the file's code section.
        file_code = {}
    return code_from_mapping(merged({"code": file_code}, "code", overrides))


def axis_from(name: str, value: Any) -> Axis:
    if isinstance(value, str):
        return Axis.parse(name, value)
    if isinstance(value, (list, tuple)):
        return Axis(name, tuple(as_float(f"sweep.{name}", v) for v in value))
    raise ConfigError(f"sweep.{name}_values", f"expected a list or range string, got {value!r}")


def int_pair(field: str, value: Any) -> tuple[int, int]:
    """Accepts [lo, hi] or "lo:hi"."""
    if isinstance(value, str):
        value = value.split(":")
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(field, f"expected lo:hi, got {value!r}")
    return as_int(field, value[0]), as_int(field, value[1])


def float_pair(field: str, value: Any) -> tuple[float, float]:
    if isinstance(value, str):
        value = value.split(":")
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(field, f"expected lo:hi, got {value!r}")
    return as_float(field, value[0]), as_float(field, value[1])


def as_bool(field: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        return is_truthy(value)
    raise ConfigError(field, f"expected a boolean, got {value!r}")
