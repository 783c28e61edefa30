from __future__ import annotations

import argparse
import dataclasses
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .chain import secret_key_rate
from .code_gkp import StategenMode
from .config_file import (
    FileConfig,
    as_bool,
    axis_from,
    build_chain,
    build_code,
    float_pair,
    int_pair,
    load_config_file,
    merged,
)
from .env import default_seed, default_threads, log_level_name, try_load_dotenv
from .errors import ConfigError, DomainError, ThresholdNotFound, ValidationFailed
from .mc_oracle import McSettings, run_validation_suite
from .models import CODE_FAMILIES, RateBreakdown, RepeaterConfig, as_float, as_int
from .output import SWEEP_COLUMNS, VALIDATE_COLUMNS, RunManifest, emit, sweep_record
from .sweep import (
    DEFAULT_M_RANGE,
    SQUEEZING_BRACKET_DB,
    SQUEEZING_RESOLUTION_DB,
    distance_curve,
    nonzero_region,
    optimize_m,
    scan_nm,
    squeezing_threshold,
)

log = logging.getLogger("loopqr")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_VALIDATION = 4

# validate fails on any check row with |z| above this.
Z_LIMIT = 5.0


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON config file")
    common.add_argument("--log-level", help="overrides LOG_LEVEL")
    common.add_argument("--threads", type=int, help="worker threads (default LOOPQR_THREADS or 1)")
    common.add_argument("--out", type=Path, help="write results here instead of stdout")
    common.add_argument("--json", action="store_true", help="emit JSON instead of a table or summary")
    return common


def _add_chain_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("chain")
    group.add_argument("--L", dest="L", type=float, help="total distance (km)")
    group.add_argument("--n", type=int, help="segments")
    group.add_argument("--m", type=int, help="loop passes per signaling period")
    group.add_argument("--L-att", dest="L_att", type=float, help="attenuation length (km)")
    group.add_argument("--c-fiber", dest="c_fiber", type=float, help="signal velocity (m/s)")
    group.add_argument("--p-link", dest="p_link", type=float)
    group.add_argument("--p-loop", dest="p_loop", type=float)
    group.add_argument("--p-bsm", dest="p_bsm", type=float)


def _add_code_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("code")
    group.add_argument("--code", dest="family", choices=CODE_FAMILIES)
    group.add_argument("--s", type=float, help="GKP squeezing (dB)")
    group.add_argument("--stategen", choices=[mode.value for mode in StategenMode])
    group.add_argument("--a", type=int, help="QPC photons per block")
    group.add_argument("--b", type=int, help="QPC blocks")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="loopqr",
        description="Secret key rates of all-optical fiber-loop quantum repeaters.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rate = sub.add_parser("rate", parents=[common], help="raw rate, SKF and SKR of one configuration")
    _add_chain_args(rate)
    _add_code_args(rate)
    rate.add_argument("--optimize-m", action="store_true", help="pick m maximizing the SKF")
    rate.add_argument("--m-range", help="lo:hi for --optimize-m (default 1:2000)")
    rate.set_defaults(handler=cmd_rate)

    sweep = sub.add_parser("sweep", parents=[common], help="n-m grid or SKF-vs-distance table")
    _add_chain_args(sweep)
    _add_code_args(sweep)
    sweep.add_argument("--kind", choices=("nm", "distance"))
    sweep.add_argument("--n-values", help="comma list or start:stop:num[:log]")
    sweep.add_argument("--m-values", help="comma list or start:stop:num[:log]")
    sweep.add_argument("--L-values", dest="L_values", help="comma list or start:stop:num[:log] (km)")
    sweep.add_argument("--m-range", help="lo:hi for the per-distance m optimization")
    sweep.add_argument("--optimize-a", action="store_const", const=True, help="QPC: optimize a per distance")
    sweep.set_defaults(handler=cmd_sweep)

    threshold = sub.add_parser("threshold", parents=[common], help="minimum squeezing for a nonzero SKF")
    _add_chain_args(threshold)
    threshold.add_argument("--family", choices=("gkp", "steane"))
    threshold.add_argument("--stategen", choices=[mode.value for mode in StategenMode])
    threshold.add_argument("--target-r", dest="target_r", type=float)
    threshold.add_argument("--bracket", help="lo:hi in dB (default 5:30)")
    threshold.add_argument("--resolution", type=float, help="dB (default 0.1)")
    threshold.add_argument("--m-range", help="lo:hi (default 1:2000)")
    threshold.set_defaults(handler=cmd_threshold)

    validate = sub.add_parser("validate", parents=[common], help="Monte Carlo checks of the analytic paths")
    validate.add_argument("--samples", type=int)
    validate.add_argument("--seed", type=int, help="default LOOPQR_SEED")
    validate.set_defaults(handler=cmd_validate)
    return parser


def _chain_overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {key: getattr(args, key) for key in ("L", "n", "m", "L_att", "c_fiber", "p_link", "p_loop", "p_bsm")}


def _code_overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {key: getattr(args, key) for key in ("family", "s", "stategen", "a", "b")}


def _m_range(value: Any) -> tuple[int, int]:
    return DEFAULT_M_RANGE if value is None else int_pair("m_range", value)


def _threads(args: argparse.Namespace) -> int:
    if args.threads is None:
        return default_threads()
    if args.threads < 1:
        raise ConfigError("threads", f"must be >= 1, got {args.threads}")
    return args.threads


def rate_summary(config: RepeaterConfig, rate: RateBreakdown) -> str:
    lines = [
        f"code       {rate.code}",
        f"chain      L={config.length_km:g} km  n={config.n}  m={config.m}  segment={config.segment_km:g} km",
        f"raw rate   {rate.raw_rate_hz:.6g} Hz",
        f"QBER       {rate.epsilon:.6g}",
        f"SKF        {rate.skf:.6g}" + ("" if rate.skf == rate.skf_unclamped else f"  (unclamped {rate.skf_unclamped:.6g})"),
        f"SKR        {rate.skr_hz:.6g} Hz",
    ]
    return "\n".join(lines)


def _write_document(args: argparse.Namespace, manifest: RunManifest, result: Any, summary: str) -> None:
    """JSON to --out or stdout for --json; otherwise a human summary (and JSON to --out if given)."""
    if args.json:
        emit(manifest, out=args.out, as_json=True, result=result)
        return
    print(summary)
    if args.out is not None:
        emit(manifest, out=args.out, as_json=True, result=result)


def cmd_rate(args: argparse.Namespace, file_cfg: FileConfig) -> int:
    config = build_chain(file_cfg, _chain_overrides(args))
    code = build_code(file_cfg, _code_overrides(args))
    if args.optimize_m:
        m, rate = optimize_m(config, code, _m_range(args.m_range))
        config = dataclasses.replace(config, m=m)
    else:
        rate = secret_key_rate(config, code)
    manifest = RunManifest("rate", {"chain": config.to_dict(), "code": code.to_dict()})
    _write_document(args, manifest, rate.to_dict(), rate_summary(config, rate))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, file_cfg: FileConfig) -> int:
    values = merged(
        file_cfg,
        "sweep",
        {
            "kind": args.kind,
            "n_values": args.n_values,
            "m_values": args.m_values,
            "L_values": args.L_values,
            "m_range": args.m_range,
            "optimize_a": args.optimize_a,
        },
    )
    kind = str(values.get("kind", "nm"))
    code = build_code(file_cfg, _code_overrides(args))
    chain = merged(file_cfg, "chain", _chain_overrides(args))
    threads = _threads(args)

    if kind == "nm":
        for key in ("n_values", "m_values"):
            if values.get(key) is None:
                raise ConfigError(f"sweep.{key}", "is required for an n-m sweep")
        n_axis = axis_from("n", values["n_values"])
        m_axis = axis_from("m", values["m_values"])
        chain.setdefault("n", n_axis.values[0])
        config = RepeaterConfig.from_mapping(chain)
        rows = scan_nm(config, code, n_axis.values, m_axis.values, workers=threads)
        region = nonzero_region(rows)
        log.info(
            "nonzero cells %d/%d, longest segment %s km, corners max-n %s max-m %s",
            len(region.cells), len(rows), region.max_segment_km, region.max_n_corner, region.max_m_corner,
        )
        sweep_section = {"kind": "nm", "n_values": list(n_axis.values), "m_values": list(m_axis.values)}
    elif kind == "distance":
        if values.get("L_values") is None:
            raise ConfigError("sweep.L_values", "is required for a distance sweep")
        L_axis = axis_from("L", values["L_values"])
        chain.setdefault("L", L_axis.values[0])
        config = RepeaterConfig.from_mapping(chain)
        m_range = _m_range(values.get("m_range"))
        optimize_a = as_bool("sweep.optimize_a", values.get("optimize_a", False))
        rows = distance_curve(
            code, config.n, config, L_axis.values, m_range=m_range, optimize_a=optimize_a, workers=threads
        )
        sweep_section = {
            "kind": "distance",
            "L_values": list(L_axis.values),
            "m_range": list(m_range),
            "optimize_a": optimize_a,
        }
    else:
        raise ConfigError("sweep.kind", f"expected nm or distance, got {kind!r}")

    records = [sweep_record(row) for row in rows]
    manifest = RunManifest(
        "sweep", {"chain": config.to_dict(), "code": code.to_dict(), "sweep": sweep_section}
    )
    emit(manifest, out=args.out, as_json=args.json, result=records, columns=SWEEP_COLUMNS, records=records)
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace, file_cfg: FileConfig) -> int:
    values = merged(
        file_cfg,
        "threshold",
        {
            "family": args.family,
            "stategen": args.stategen,
            "target_r": args.target_r,
            "bracket": args.bracket,
            "resolution": args.resolution,
            "m_range": args.m_range,
        },
    )
    family = values.get("family") or file_cfg.get("code", {}).get("family")
    if family not in ("gkp", "steane"):
        raise ConfigError("threshold.family", f"expected gkp or steane, got {family!r}")
    try:
        stategen = StategenMode(values.get("stategen") or StategenMode.BARE)
    except ValueError:
        raise ConfigError("threshold.stategen", f"unknown mode {values.get('stategen')!r}") from None
    target_r = as_float("threshold.target_r", values.get("target_r", 0.0))
    bracket = float_pair("threshold.bracket", values.get("bracket", SQUEEZING_BRACKET_DB))
    resolution = as_float("threshold.resolution", values.get("resolution", SQUEEZING_RESOLUTION_DB))
    m_range = _m_range(values.get("m_range"))
    config = build_chain(file_cfg, _chain_overrides(args))

    result = squeezing_threshold(
        family,
        config,
        target_r=target_r,
        bracket=bracket,
        resolution=resolution,
        m_range=m_range,
        stategen_mode=stategen,
    )
    manifest = RunManifest(
        "threshold",
        {
            "chain": config.to_dict(),
            "threshold": {
                "family": family,
                "stategen": stategen.value,
                "target_r": target_r,
                "bracket": list(bracket),
                "resolution": resolution,
                "m_range": list(m_range),
            },
        },
    )
    summary = (
        f"{family} threshold {result.threshold:.2f} dB for r > {target_r:g} "
        f"(bracket {result.bracket[0]:.3f}..{result.bracket[1]:.3f} dB, m={result.m}, r={result.rate.skf:.6g})"
    )
    _write_document(args, manifest, result.to_dict(), summary)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, file_cfg: FileConfig) -> int:
    values = merged(file_cfg, "validate", {"samples": args.samples, "seed": args.seed, "workers": args.threads})
    settings = McSettings(
        samples=as_int("validate.samples", values.get("samples", McSettings.samples)),
        seed=as_int("validate.seed", values.get("seed", default_seed())),
        workers=as_int("validate.workers", values.get("workers", default_threads())),
    )
    rows = run_validation_suite(settings)
    records = [row.to_record() for row in rows]
    manifest = RunManifest(
        "validate",
        {"validate": {"samples": settings.samples, "seed": settings.seed, "workers": settings.workers}},
        seed=settings.seed,
    )
    emit(manifest, out=args.out, as_json=args.json, result=records, columns=VALIDATE_COLUMNS, records=records)
    failed = [f"{row.quantity}[{row.model}]" for row in rows if row.kind == "check" and not abs(row.z) <= Z_LIMIT]
    if failed:
        raise ValidationFailed(failed)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try_load_dotenv()
    args = build_parser().parse_args(argv)

    level_name = (args.log_level or log_level_name()).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s - %(message)s",
    )

    try:
        file_cfg = load_config_file(args.config)
        return args.handler(args, file_cfg)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except ThresholdNotFound as exc:
        log.error(
            "%s (bracket %s..%s dB, skf_low=%s, skf_high=%s)",
            exc, exc.bracket[0], exc.bracket[1], exc.skf_low, exc.skf_high,
        )
        return EXIT_DOMAIN
    except DomainError as exc:
        log.error("numerical domain error: %s", exc)
        return EXIT_DOMAIN
    except ValidationFailed as exc:
        log.error("%s (|z| > %g)", exc, Z_LIMIT)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
