"""Scheme registry and the shared end-to-end run orchestration.

Every scheme module exposes the same surface: a params dataclass plus
place / deliver / decode_user / formula_point.  `execute` drives one
deterministic run: sample the channel, place, deliver, decode every
user, and compare measurements against the closed forms.  A singular
decode system triggers a re-delivery with a fresh public coefficient
seed; a degenerate precoder search triggers a channel resample.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from ..blocks import RunReport, TransmitLog
from ..channel import ChannelState, sample_channel
from ..errors import DecodeFailure, NonOrthogonalityFailure, Singular, SingularDecode
from ..library import FileLibrary
from ..rng import derived_rng
from . import decentralized, feedback, grouped, mt

MODULES = {
    "mt": mt,
    "grouped": grouped,
    "feedback": feedback,
    "decentralized": decentralized,
}

SCHEME_NAMES = tuple(MODULES)


def make_params(scheme: str, **kwargs):
    cls = {
        "mt": mt.MtParams,
        "grouped": grouped.GroupedParams,
        "feedback": feedback.FbParams,
        "decentralized": decentralized.DecParams,
    }[scheme]
    return cls(**kwargs)


def worst_demand(K: int, N: int) -> list[int]:
    """Canonical demand; the delay metric is demand independent."""
    return [(k - 1) % N + 1 for k in range(1, K + 1)]


def random_demand(K: int, N: int, seed) -> list[int]:
    rng = derived_rng(seed, "demand")
    return [rng.randrange(1, N + 1) for _ in range(K)]


@dataclass
class SchemeRun:
    scheme: str
    params: Any
    library: FileLibrary
    channel: ChannelState
    placement: Any
    demand: list[int]
    coef_seed: tuple
    key_seed: tuple
    log: TransmitLog
    report: RunReport


def execute(scheme: str, params, demand=None, channel_attempts: int = 8,
            coef_attempts: int = 20) -> SchemeRun:
    mod = MODULES[scheme]
    if demand is None:
        demand = worst_demand(params.K, params.N)
    if len(demand) != params.K or not all(1 <= d <= params.N for d in demand):
        raise ValueError(f"demand must list K files in 1..N, got {demand}")

    library = FileLibrary(params.field, params.N, params.f, params.seed)
    key_seed = (params.seed, "keys")

    last_error = None
    for ch_at in range(channel_attempts):
        channel = sample_channel(params.K, params.L, params.field,
                                 (params.seed, "channel", ch_at))
        placement = mod.place(params, library, key_seed)
        for co_at in range(coef_attempts):
            coef_seed = (params.seed, "coef", co_at)
            try:
                log = mod.deliver(params, library, placement, demand,
                                  channel, coef_seed)
                decoded = {
                    k: mod.decode_user(params, placement, k, log, channel, demand)
                    for k in range(1, params.K + 1)
                }
            except SingularDecode as exc:
                last_error = exc
                continue
            except (NonOrthogonalityFailure, Singular) as exc:
                last_error = exc
                break
            report = _build_report(scheme, mod, params, placement, log,
                                   library, demand, decoded,
                                   attempts=ch_at * coef_attempts + co_at + 1)
            return SchemeRun(scheme, params, library, channel, placement,
                             demand, coef_seed, key_seed, log, report)
    raise DecodeFailure(f"run never converged: last error {last_error!r}")


def _build_report(scheme, mod, params, placement, log, library, demand,
                  decoded, attempts) -> RunReport:
    K, f = params.K, params.f
    data_syms = sum(placement.caches[k].data_symbols() for k in range(1, K + 1))
    key_syms = sum(placement.caches[k].key_symbols() for k in range(1, K + 1))
    point = mod.formula_point(params)
    decode_ok = {
        k: decoded[k] == library.file(demand[k - 1]) for k in range(1, K + 1)
    }
    return RunReport(
        scheme=scheme,
        params=params,
        measured_delay=log.delay,
        measured_m_d=Fraction(data_syms, K * f),
        measured_m_k=Fraction(key_syms, K * f),
        formula_delay=point.delay,
        formula_m_d=point.m_d,
        formula_m_k=point.m_k,
        decode_ok=decode_ok,
        delivery_attempts=attempts,
    )
