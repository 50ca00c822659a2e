"""Keyed multi-transmitter caching with reduced subpacketization.

Users are partitioned into K/L groups of L; everyone in a group caches
the same content, so files only split into C(K/L, t/L) sub-files.  One
block is sent per (t/L+1)-group-subset: each served user's sub-file
rides a direction lying in the null space of its L-1 group mates, and L
independent key streams are stacked, one per transmit row.  Decoding
needs no linear system: cached cross-group terms cancel, zero-forcing
removes group mates, and one scalar division remains.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from ..blocks import Block, TransmitLog, UserCache
from ..channel import ChannelState, zero_force
from ..errors import DecodeFailure, InvalidParams, MissingKey
from ..formulas import FormulaPoint, formulas
from ..gf import dot, field_spec
from ..library import FileLibrary
from ..rng import derived_rng, symbols
from ..subsets import binom, enumerate_subsets, min_valid_f, subset_rank, subsets_of

SCHEME = "grouped"


@dataclass(frozen=True)
class GroupedParams:
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
        if self.K % self.L:
            raise InvalidParams(f"grouping needs L | K, got K={self.K}, L={self.L}")
        if self.t % self.L:
            raise InvalidParams(f"grouping needs L | t, got t={self.t}, L={self.L}")
        if not (0 <= self.t <= self.K - self.L or self.t == self.K):
            raise InvalidParams(
                f"cache parameter t={self.t} outside 0..{self.K - self.L} "
                f"(or t=K={self.K})"
            )
        base = min_valid_f("grouped", self.K, self.L, self.t)
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
    def n_groups(self) -> int:
        return self.K // self.L

    @property
    def t_g(self) -> int:
        """Group-level cache parameter t/L."""
        return self.t // self.L

    @property
    def width(self) -> int:
        return self.f // binom(self.n_groups, self.t_g) if not self.full_cache else self.f

    @property
    def M(self) -> Fraction:
        return Fraction(self.N * self.t, self.K) + self.L * (1 - Fraction(self.t, self.K))


def group_of(params: GroupedParams, k: int) -> int:
    return (k - 1) % params.n_groups + 1


def group_members(params: GroupedParams, g: int) -> tuple[int, ...]:
    return tuple(l * params.n_groups + g for l in range(params.L))


class GroupedPlacement:
    def __init__(self, params, caches, keys, key_seed):
        self.params = params
        self.caches = caches
        self.keys = keys
        self.key_seed = key_seed


def _subfile(params: GroupedParams, library: FileLibrary, n: int, tau_g):
    start = subset_rank(tau_g, params.n_groups) * params.width
    return library.slice(n, start, params.width)


def place(params: GroupedParams, library: FileLibrary, key_seed=None) -> GroupedPlacement:
    if key_seed is None:
        key_seed = (params.seed, "keys")
    caches = {k: UserCache(k) for k in range(1, params.K + 1)}

    if params.full_cache:
        for n in range(1, params.N + 1):
            whole = library.file(n)
            for k in caches:
                caches[k].data[(n, tuple(range(1, params.n_groups + 1)))] = whole
        return GroupedPlacement(params, caches, {}, key_seed)

    for n in range(1, params.N + 1):
        for tau_g in enumerate_subsets(params.n_groups, params.t_g):
            frag = _subfile(params, library, n, tau_g)
            for k in caches:
                if group_of(params, k) in tau_g:
                    caches[k].data[(n, tau_g)] = frag

    keys = {}
    for rank, tau_k in enumerate(enumerate_subsets(params.n_groups, params.t_g + 1)):
        for beta in range(1, params.L + 1):
            stream = symbols(derived_rng(key_seed, "grpkey", rank, beta),
                             params.field.q, params.width)
            keys[(tau_k, beta)] = stream
            for k in caches:
                if group_of(params, k) in tau_k:
                    caches[k].keys[(tau_k, beta)] = stream
    return GroupedPlacement(params, caches, keys, key_seed)


def deliver(params: GroupedParams, library: FileLibrary,
            placement: GroupedPlacement, demand, channel: ChannelState,
            coef_seed, ablate_keys: bool = False) -> TransmitLog:
    # coef_seed is unused: this scheme sends plain sums, no random combos
    f = params.field
    log = TransmitLog(f=params.f)
    if params.full_cache:
        return log
    L = params.L

    # each user's in-group direction depends only on the channel
    precoders = {}
    for g in range(1, params.n_groups + 1):
        members = group_members(params, g)
        for k in members:
            precoders[k] = zero_force(channel, members, (k,)).u

    for s_rank, S in enumerate(enumerate_subsets(params.n_groups, params.t_g + 1)):
        rows = [f.zeros(params.width) for _ in range(L)]
        for g in S:
            tau = tuple(x for x in S if x != g)
            for k in group_members(params, g):
                frag = _subfile(params, library, demand[k - 1], tau)
                u = precoders[k]
                for l in range(L):
                    f.axpy_into(rows[l], u[l], frag)
        key_ids = tuple((S, beta) for beta in range(1, L + 1))
        if not ablate_keys:
            for l in range(L):
                f.xor_into(rows[l], placement.keys[key_ids[l]])
        log.blocks.append(Block(
            subset=S,
            omega=1,
            key_ids=key_ids,
            rows=rows,
            meta={"s_rank": s_rank, "precoders": precoders},
        ))
    return log


def decode_user(params: GroupedParams, placement: GroupedPlacement, k: int,
                log: TransmitLog, channel: ChannelState, demand):
    f = params.field
    cache = placement.caches[k]
    want = demand[k - 1]
    if params.full_cache:
        return cache.data[(want, tuple(range(1, params.n_groups + 1)))]

    g = group_of(params, k)
    h_k = channel.row(k)
    recovered = {}
    for block in log.blocks:
        S = block.subset
        if g not in S:
            continue
        y = channel.receive(k, block.rows)
        for l in range(params.L):
            key = cache.keys.get(block.key_ids[l])
            if key is None:
                raise MissingKey(f"user {k} lacks key {block.key_ids[l]}")
            f.axpy_into(y, h_k[l], key)
        precoders = block.meta["precoders"]
        for g2 in S:
            if g2 == g:
                continue
            tau2 = tuple(x for x in S if x != g2)
            for j in group_members(params, g2):
                coef = dot(f, h_k, precoders[j])
                f.axpy_into(y, coef, cache.data[(demand[j - 1], tau2)])
        own = dot(f, h_k, precoders[k])
        f.scale_into(y, f.inv(own))
        recovered[tuple(x for x in S if x != g)] = y

    out = f.zeros(params.f)
    for rank, tau_g in enumerate(enumerate_subsets(params.n_groups, params.t_g)):
        if g in tau_g:
            frag = cache.data[(want, tau_g)]
        else:
            frag = recovered.get(tau_g)
            if frag is None:
                raise DecodeFailure(f"user {k} missing sub-file for groups {tau_g}")
        start = rank * params.width
        out[start : start + params.width] = frag
    return out


def formula_point(params: GroupedParams) -> FormulaPoint:
    if params.full_cache:
        return FormulaPoint("grouped", params.K, params.L, params.N,
                            Fraction(params.N), Fraction(params.K),
                            Fraction(0), Fraction(params.N), Fraction(0), None)
    return formulas("grouped", params.K, params.L, params.N, t=params.t)
