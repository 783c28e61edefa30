from __future__ import annotations

import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, TextIO

from . import __version__
from .sweep import SweepRow

SWEEP_COLUMNS = ("code", "L", "n", "m", "segment_km", "raw_rate_hz", "skf", "skr_hz", "epsilon")
VALIDATE_COLUMNS = ("quantity", "model", "analytic", "mc_mean", "mc_stderr", "z", "kind")

MANIFEST_SUFFIX = ".manifest.json"


def fmt_float(value: float) -> str:
    # 17 significant digits round-trip every double.
    return format(value, ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def sweep_record(row: SweepRow) -> dict[str, Any]:
    return {
        "code": row.rate.code,
        "L": row.config.length_km,
        "n": row.config.n,
        "m": row.config.m,
        "segment_km": row.config.segment_km,
        "raw_rate_hz": row.rate.raw_rate_hz,
        "skf": row.rate.skf,
        "skr_hz": row.rate.skr_hz,
        "epsilon": row.rate.epsilon,
    }


def write_csv(stream: TextIO, columns: Sequence[str], records: Iterable[Mapping[str, Any]]) -> None:
    """RFC-4180 CSV: CRLF line ends, minimal quoting, fixed column order."""
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([_cell(record[column]) for column in columns])


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: Mapping[str, Any]
    version: str = __version__
    seed: Optional[int] = None
    timestamp: str = field(
        default_factory=lambda: datetime.now(tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    )
    outputs: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
            "config": dict(self.config),
        }


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + MANIFEST_SUFFIX)


def json_document(manifest: RunManifest, result: Any) -> dict[str, Any]:
    """Config sections at top level so the document loads back as a config file."""
    return {**manifest.config, "result": result, "manifest": manifest.to_dict()}


def dump_json(document: Any, stream: TextIO) -> None:
    json.dump(document, stream, indent=2)
    stream.write("\n")


def emit(
    manifest: RunManifest,
    *,
    out: Optional[Path],
    as_json: bool,
    result: Any,
    columns: Sequence[str] = (),
    records: Sequence[Mapping[str, Any]] = (),
    stdout: Optional[TextIO] = None,
) -> None:
    """Write result as JSON (manifest embedded) or CSV (manifest as a sidecar when --out is set)."""
    stdout = stdout or sys.stdout
    if out is not None:
        manifest = dataclasses.replace(manifest, outputs=(str(out),))
    if as_json or not columns:
        document = json_document(manifest, result)
        if out is None:
            dump_json(document, stdout)
            return
        with out.open("w", encoding="utf-8") as fh:
            dump_json(document, fh)
        return
    if out is None:
        write_csv(stdout, columns, records)
        return
    with out.open("w", encoding="utf-8", newline="") as fh:
        write_csv(fh, columns, records)
    with manifest_path(out).open("w", encoding="utf-8") as fh:
        dump_json({**manifest.config, "manifest": manifest.to_dict()}, fh)
