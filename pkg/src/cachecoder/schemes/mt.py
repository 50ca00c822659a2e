"""Keyed multi-transmitter coded caching (baseline scheme).

Placement splits each file into C(K,t) sub-files indexed by t-subsets,
then each sub-file into C(K-t-1,L-1) mini-files; one-time-pad key
streams of mini-file size are tied to (t+L)-subsets, one per block
repetition.  Delivery walks the (t+L)-subsets S in lexicographic order
and, per S, sends C(t+L-1,t) repeated columns: each is a sum over the
(t+1)-subsets T of S of a zero-forcing direction times a random linear
combination of fresh mini-files, masked by the same key stream on every
transmit row.  Each user solves one small linear system per S it
belongs to and reassembles its requested file exactly.

A run is single-threaded and deterministic; distinct runs share nothing
mutable.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from ..blocks import Block, TransmitLog, UserCache
from ..channel import ChannelState, zero_force
from ..errors import (
    CounterExhausted,
    DecodeFailure,
    InvalidParams,
    MissingKey,
    Singular,
    SingularDecode,
)
from ..formulas import FormulaPoint, formulas
from ..gf import dot, field_spec, solve_streams
from ..library import FileLibrary
from ..rng import derived_rng, nonzero_symbol, symbols
from ..subsets import binom, enumerate_subsets, min_valid_f, subset_rank, subsets_of

SCHEME = "mt"


@dataclass(frozen=True)
class MtParams:
    K: int
    L: int
    N: int
    t: int
    f: int
    m: int = 8
    poly: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.N >= self.K >= self.L >= 1:
            raise InvalidParams(
                f"need N >= K >= L >= 1, got N={self.N}, K={self.K}, L={self.L}"
            )
        if not (1 <= self.t <= self.K - self.L or self.t == self.K):
            raise InvalidParams(
                f"cache parameter t={self.t} outside 1..{self.K - self.L} "
                f"(or t=K={self.K} for the full-cache corner)"
            )
        base = min_valid_f("mt", self.K, self.L, self.t)
        if self.f < 1 or self.f % base:
            raise InvalidParams(
                f"f={self.f} must be a positive multiple of min_valid_f={base}"
            )

    @cached_property
    def field(self):
        return field_spec(self.m, self.poly)

    @property
    def full_cache(self) -> bool:
        return self.t == self.K

    @property
    def n_minifiles(self) -> int:
        return binom(self.K - self.t - 1, self.L - 1)

    @property
    def subpacketization(self) -> int:
        return binom(self.K, self.t) * self.n_minifiles

    @property
    def width(self) -> int:
        """Symbols per mini-file, key stream, and block column."""
        return self.f // self.subpacketization if not self.full_cache else self.f

    @property
    def reps(self) -> int:
        """Block repetitions per subset S."""
        return binom(self.t + self.L - 1, self.t)

    @property
    def M(self) -> Fraction:
        return Fraction((self.N - 1) * self.t, self.K) + 1


class MtPlacement:
    def __init__(self, params: MtParams, caches, keys, key_seed):
        self.params = params
        self.caches = caches
        self.keys = keys
        self.key_seed = key_seed


def _subfile_width(params: MtParams) -> int:
    return params.f // binom(params.K, params.t)


def _fragment(params: MtParams, library: FileLibrary, n: int, tau, j: int):
    """Mini-file j of sub-file tau of file n, as a fresh slice."""
    base = subset_rank(tau, params.K) * _subfile_width(params)
    start = base + (j - 1) * params.width
    return library.slice(n, start, params.width)


def place(params: MtParams, library: FileLibrary, key_seed=None) -> MtPlacement:
    """Fill every cache with its sub-file shares and key streams.

    Fragment arrays are shared between caches (they are never mutated),
    so measured storage still counts each user's copy.
    """
    if key_seed is None:
        key_seed = (params.seed, "keys")
    K = params.K
    caches = {k: UserCache(k) for k in range(1, K + 1)}

    if params.full_cache:
        for n in range(1, params.N + 1):
            whole = library.file(n)
            for k in range(1, K + 1):
                caches[k].data[(n, tuple(range(1, K + 1)), 1)] = whole
        return MtPlacement(params, caches, {}, key_seed)

    for n in range(1, params.N + 1):
        for tau in enumerate_subsets(K, params.t):
            for j in range(1, params.n_minifiles + 1):
                frag = _fragment(params, library, n, tau, j)
                for k in tau:
                    caches[k].data[(n, tau, j)] = frag

    keys = {}
    for rank, tau_k in enumerate(enumerate_subsets(K, params.t + params.L)):
        for beta in range(1, params.reps + 1):
            stream = symbols(
                derived_rng(key_seed, "mtkey", rank, beta),
                params.field.q,
                params.width,
            )
            keys[(tau_k, beta)] = stream
            for k in tau_k:
                caches[k].keys[(tau_k, beta)] = stream
    return MtPlacement(params, caches, keys, key_seed)


def _coef_rng(coef_seed, s_rank: int, t_rank: int, omega: int):
    """Public coefficient stream shared by encoder and decoders."""
    return derived_rng(coef_seed, "phi", s_rank, t_rank, omega)


def deliver(params: MtParams, library: FileLibrary, placement: MtPlacement,
            demand, channel: ChannelState, coef_seed,
            ablate_keys: bool = False) -> TransmitLog:
    f = params.field
    log = TransmitLog(f=params.f)
    if params.full_cache:
        return log
    K, L, t = params.K, params.L, params.t
    w = params.width
    fresh = {}  # (user r, tau) -> next mini-file index

    for s_rank, S in enumerate(enumerate_subsets(K, t + L)):
        t_sets = subsets_of(S, t + 1)
        precoders = {T: zero_force(channel, S, T).u for T in t_sets}
        frag_idx = {}
        for T in t_sets:
            for r in T:
                tau = tuple(u for u in T if u != r)
                j = fresh.get((r, tau), 1)
                if j > params.n_minifiles:
                    raise CounterExhausted(
                        f"mini-file counter for user {r}, subset {tau} exceeded "
                        f"{params.n_minifiles}"
                    )
                frag_idx[(T, r)] = j

        for omega in range(1, params.reps + 1):
            rows = [f.zeros(w) for _ in range(L)]
            for T in t_sets:
                rng = _coef_rng(coef_seed, s_rank, subset_rank(T, K), omega)
                combo = f.zeros(w)
                for r in T:
                    coef = nonzero_symbol(rng, f.q)
                    tau = tuple(u for u in T if u != r)
                    frag = _fragment(params, library, demand[r - 1], tau,
                                     frag_idx[(T, r)])
                    f.axpy_into(combo, coef, frag)
                u = precoders[T]
                for l in range(L):
                    f.axpy_into(rows[l], u[l], combo)
            key_id = (S, omega)
            if not ablate_keys:
                key = placement.keys[key_id]
                for l in range(L):
                    f.xor_into(rows[l], key)
            log.blocks.append(Block(
                subset=S,
                omega=omega,
                key_ids=(key_id,),
                rows=rows,
                meta={
                    "s_rank": s_rank,
                    "precoders": precoders,
                    "frag_idx": frag_idx,
                    "coef_seed": coef_seed,
                },
            ))

        for T in t_sets:
            for r in T:
                tau = tuple(u for u in T if u != r)
                fresh[(r, tau)] = fresh.get((r, tau), 1) + 1
    return log


def decode_user(params: MtParams, placement: MtPlacement, k: int,
                log: TransmitLog, channel: ChannelState, demand):
    """Reconstruct user k's file from its received streams, its cache,
    and the public block metadata."""
    f = params.field
    cache = placement.caches[k]
    want = demand[k - 1]
    if params.full_cache:
        return cache.data[(want, tuple(range(1, params.K + 1)), 1)]

    h_k = channel.row(k)
    mask_scalar = 0
    for v in h_k:
        mask_scalar ^= v

    recovered = {}
    per_subset = {}
    for block in log.blocks:
        if k in block.subset:
            per_subset.setdefault(block.subset, []).append(block)

    for S, blocks in per_subset.items():
        meta = blocks[0].meta
        t_sets_k = [T for T in subsets_of(S, params.t + 1) if k in T]
        coef_rows = []
        rhs = []
        for block in blocks:
            y = channel.receive(k, block.rows)
            key_id = block.key_ids[0]
            key = cache.keys.get(key_id)
            if key is None:
                raise MissingKey(f"user {k} lacks key {key_id}")
            f.axpy_into(y, mask_scalar, key)
            row = []
            for T in t_sets_k:
                a_T = dot(f, h_k, meta["precoders"][T])
                rng = _coef_rng(meta["coef_seed"], meta["s_rank"],
                                subset_rank(T, params.K), block.omega)
                phi_k = 0
                for r in T:
                    coef = nonzero_symbol(rng, f.q)
                    if r == k:
                        phi_k = coef
                    else:
                        tau = tuple(u for u in T if u != r)
                        frag = cache.data[(demand[r - 1], tau,
                                           meta["frag_idx"][(T, r)])]
                        f.axpy_into(y, f.mul(a_T, coef), frag)
                row.append(f.mul(a_T, phi_k))
            coef_rows.append(row)
            rhs.append(y)
        try:
            streams = solve_streams(f, coef_rows, rhs)
        except Singular as exc:
            raise SingularDecode(
                f"user {k}, subset {S}: {exc}; re-deliver with new coefficients"
            ) from exc
        for T, stream in zip(t_sets_k, streams):
            tau = tuple(u for u in T if u != k)
            recovered[(tau, meta["frag_idx"][(T, k)])] = stream

    out = f.zeros(params.f)
    sub_w = _subfile_width(params)
    for rank, tau in enumerate(enumerate_subsets(params.K, params.t)):
        for j in range(1, params.n_minifiles + 1):
            if k in tau:
                frag = cache.data[(want, tau, j)]
            else:
                frag = recovered.get((tau, j))
                if frag is None:
                    raise DecodeFailure(
                        f"user {k} never received mini-file {j} of subset {tau}"
                    )
            start = rank * sub_w + (j - 1) * params.width
            out[start : start + params.width] = frag
    return out


def formula_point(params: MtParams) -> FormulaPoint:
    if params.full_cache:
        return FormulaPoint("mt", params.K, params.L, params.N,
                            Fraction(params.N), Fraction(params.K),
                            Fraction(0), Fraction(params.N), Fraction(0), None)
    return formulas("mt", params.K, params.L, params.N, t=params.t)
