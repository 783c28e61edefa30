"""Repeater-chain assembly: derived link quantities, the SKR, reference bounds."""
from __future__ import annotations

import functools
import logging
import math

from . import code_gkp, code_qpc, gauss_noise, geom_stats
from .errors import DomainError
from .models import (
    CodeSpec,
    DerivedLink,
    GkpCode,
    QpcCode,
    RateBreakdown,
    RepeaterConfig,
    SteaneGkpCode,
)

log = logging.getLogger("loopqr.chain")

METERS_PER_KM = 1000.0


def _km_to_m(km: float) -> float:
    # The only km -> m conversion in the package.
    return km * METERS_PER_KM


def derive_link(config: RepeaterConfig) -> DerivedLink:
    segment = config.segment_km
    p = config.p_bsm * config.p_link**2 * math.exp(-segment / config.att_length_km)
    return DerivedLink(
        p=p,
        q=1.0 - p,
        eta_loop=config.p_loop * math.exp(-segment / (config.m * config.att_length_km)),
        tau0=_km_to_m(segment) / config.c_fiber,
        eta_total=math.exp(-config.length_km / config.att_length_km),
    )


@functools.lru_cache(maxsize=4096)
def _raw_rate(n: int, p: float, tau0: float) -> float:
    # Independent of m and of the code.
    return geom_stats.raw_rate(n, p, tau0)


def loop_coherence_time(config: RepeaterConfig) -> float:
    """Storage time after which a loop has lost 1/e of its photons, in seconds."""
    return _km_to_m(config.att_length_km) / config.c_fiber


def plob_bound(eta_total: float) -> float:
    """Repeaterless secret-key capacity -log2(1 - eta), bits per channel use."""
    if not (0.0 <= eta_total < 1.0):
        raise DomainError(f"PLOB bound needs transmissivity in [0, 1), got {eta_total}")
    return -math.log1p(-eta_total) / math.log(2.0)


def unencoded_upper_bound(config: RepeaterConfig) -> float:
    """Survival bound of single photons stored in loops: e^{-(L/L_att) 2(n-1)/n}."""
    return math.exp(-(config.length_km / config.att_length_km) * 2.0 * (config.n - 1) / config.n)


def _never_succeeds(link: DerivedLink) -> bool:
    # p below double resolution: waits diverge and stored qubits fully decohere.
    return link.q == 1.0


def _gkp_family(config: RepeaterConfig, code: GkpCode | SteaneGkpCode, link: DerivedLink):
    delta2 = gauss_noise.squeezing_to_variance(code.s_db)
    probs = code_gkp.gkp_elementary_probs(delta2, link.eta_loop)
    if _never_succeeds(link):
        epsilon = 0.0 if config.n == 1 else 0.5
    elif isinstance(code, SteaneGkpCode):
        epsilon = code_gkp.qber_steane(probs, config.n, config.m, link.q, code.stategen_mode)
    else:
        epsilon = code_gkp.qber_gkp(probs, config.n, config.m, link.q)
    diagnostics = {
        "delta2": delta2,
        "p_corr": probs.p_corr,
        "p_swap": probs.p_swap,
        "p_stategen": probs.p_stategen,
    }
    return epsilon, code_gkp.skf_gkp_unclamped(epsilon), diagnostics


def _qpc(config: RepeaterConfig, code: QpcCode, link: DerivedLink):
    shape = code_qpc.QpcShape(code.a, code.b)
    if _never_succeeds(link):
        skf = 1.0 if config.n == 1 else 0.0
    else:
        skf = code_qpc.skf_qpc(shape, config.n, config.m, link.q, link.eta_loop)
    diagnostics = {
        "p_qpc": code_qpc.qpc_success_closed(shape, link.eta_loop),
        "swap_factor": code_qpc.qpc_no_loss_success(code.b),
    }
    return 0.0, skf, diagnostics


def secret_key_rate(config: RepeaterConfig, code: CodeSpec) -> RateBreakdown:
    link = derive_link(config)
    raw = _raw_rate(config.n, link.p, link.tau0)
    if isinstance(code, QpcCode):
        epsilon, unclamped, extra = _qpc(config, code, link)
    elif isinstance(code, (GkpCode, SteaneGkpCode)):
        epsilon, unclamped, extra = _gkp_family(config, code, link)
    else:
        raise DomainError(f"unsupported code {code!r}")
    skf = min(1.0, max(0.0, unclamped))
    log.debug(
        "%s L=%s n=%d m=%d: R=%.6g Hz eps=%.6g r=%.6g",
        code.label, config.length_km, config.n, config.m, raw, epsilon, skf,
    )
    return RateBreakdown(
        code=code.label,
        raw_rate_hz=raw,
        skf=skf,
        skr_hz=skf * raw,
        epsilon=epsilon,
        skf_unclamped=unclamped,
        diagnostics={**link.to_dict(), **extra},
    )
