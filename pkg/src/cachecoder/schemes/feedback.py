"""Keyed multi-transmitter caching with reduced feedback.

Zero-forcing moves to the receiver side: for every L-subset lambda the
transmitters premultiply the stacked row messages by the exact inverse
of the lambda channel submatrix, so each lambda member reads its own
row directly.  The remaining t served users sit in a disjoint set pi,
partitioned into L chunks that rotate across the L inner iterations so
every lambda member pairs with every chunk exactly once.  Each row is a
plain XOR of fragments (no random coefficients) plus its own key
stream, so decoding is cancellation and one scalar division.

Sub-files are addressed per requesting user: a sub-file of W_d needed
by user k splits into C(K-t-1,L-1) sigma-parts and L+t freshness slots.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from ..blocks import Block, TransmitLog, UserCache
from ..channel import ChannelState
from ..errors import CounterExhausted, DecodeFailure, InvalidParams, MissingKey
from ..formulas import FormulaPoint, formulas
from ..gf import dot, field_spec
from ..library import FileLibrary
from ..rng import derived_rng, symbols
from ..subsets import binom, enumerate_subsets, min_valid_f, rank_within, subset_rank, subsets_of

SCHEME = "feedback"


@dataclass(frozen=True)
class FbParams:
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
        if self.t % self.L:
            raise InvalidParams(f"need L | t, got t={self.t}, L={self.L}")
        if not (0 <= self.t <= self.K - self.L or self.t == self.K):
            raise InvalidParams(
                f"cache parameter t={self.t} outside 0..{self.K - self.L} "
                f"(or t=K={self.K})"
            )
        base = min_valid_f("feedback", self.K, self.L, self.t)
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
    def subpacketization(self) -> int:
        return (binom(self.K, self.t) * binom(self.K - self.t - 1, self.L - 1)
                * (self.L + self.t))

    @property
    def width(self) -> int:
        return self.f // self.subpacketization if not self.full_cache else self.f

    @property
    def keys_per_subset(self) -> int:
        return binom(self.K - self.t - 1, self.L - 1) * (self.t + 1) * self.L

    @property
    def M(self) -> Fraction:
        m_k = Fraction(self.L * (self.K - self.t) * (self.t + 1),
                       self.K * (self.t + self.L))
        return Fraction(self.N * self.t, self.K) + m_k


class FbPlacement:
    def __init__(self, params, caches, keys, key_seed):
        self.params = params
        self.caches = caches
        self.keys = keys
        self.key_seed = key_seed


def _subfile_width(params: FbParams) -> int:
    return params.f // binom(params.K, params.t)


def _fragment_start(params: FbParams, k: int, tau, sigma, r: int) -> int:
    """Offset of fragment (sigma, r) of sub-file tau as user k addresses it."""
    base = subset_rank(tau, params.K) * _subfile_width(params)
    others = [u for u in range(1, params.K + 1) if u not in tau and u != k]
    s_rank = rank_within(sigma, others)
    return base + (s_rank * (params.L + params.t) + (r - 1)) * params.width


def place(params: FbParams, library: FileLibrary, key_seed=None) -> FbPlacement:
    if key_seed is None:
        key_seed = (params.seed, "keys")
    caches = {k: UserCache(k) for k in range(1, params.K + 1)}

    if params.full_cache:
        for n in range(1, params.N + 1):
            whole = library.file(n)
            for k in caches:
                caches[k].data[(n, tuple(range(1, params.K + 1)))] = whole
        return FbPlacement(params, caches, {}, key_seed)

    for n in range(1, params.N + 1):
        for tau in enumerate_subsets(params.K, params.t):
            start = subset_rank(tau, params.K) * _subfile_width(params)
            frag = library.slice(n, start, _subfile_width(params))
            for k in tau:
                caches[k].data[(n, tau)] = frag

    keys = {}
    for rank, tau_k in enumerate(enumerate_subsets(params.K, params.t + 1)):
        for beta in range(1, params.keys_per_subset + 1):
            stream = symbols(derived_rng(key_seed, "fbkey", rank, beta),
                             params.field.q, params.width)
            keys[(tau_k, beta)] = stream
            for k in tau_k:
                caches[k].keys[(tau_k, beta)] = stream
    return FbPlacement(params, caches, keys, key_seed)


def deliver(params: FbParams, library: FileLibrary, placement: FbPlacement,
            demand, channel: ChannelState, coef_seed,
            ablate_keys: bool = False) -> TransmitLog:
    # coef_seed is unused: rows are plain XOR sums
    f = params.field
    log = TransmitLog(f=params.f)
    if params.full_cache:
        return log
    K, L, t = params.K, params.L, params.t
    w = params.width
    chunk = t // L
    budget = L + t
    fresh = {}   # (user, tau, sigma) -> slots consumed
    next_beta = {}  # key subset -> streams consumed

    for lam in enumerate_subsets(K, L):
        h_inv = channel.submatrix(lam).inv_matrix()
        rest = [u for u in range(1, K + 1) if u not in lam]
        for pi in subsets_of(rest, t):
            chunks = [pi[i * chunk:(i + 1) * chunk] for i in range(L)]
            for s in range(L):
                stacked = []
                row_meta = []
                key_ids = []
                for i in range(1, L + 1):
                    v_i = (s + i - 1) % L + 1
                    phi = chunks[v_i - 1]
                    anchor = lam[i - 1]
                    mu = tuple(sorted((anchor,) + phi))
                    vset = tuple(u for u in pi if u not in phi)
                    sigma = tuple(u for u in lam if u != anchor)
                    served = set(vset) | set(mu)
                    row = f.zeros(w)
                    frag_ids = []
                    for k in mu:
                        tau = tuple(sorted(served - {k}))
                        slot = fresh.get((k, tau, sigma), 0) + 1
                        if slot > budget:
                            raise CounterExhausted(
                                f"fragment slots for user {k}, sub-file {tau}, "
                                f"part {sigma} exceeded {budget}"
                            )
                        fresh[(k, tau, sigma)] = slot
                        start = _fragment_start(params, k, tau, sigma, slot)
                        f.xor_into(row, library.slice(demand[k - 1], start, w))
                        frag_ids.append((k, tau, sigma, slot))
                    tau_k = tuple(sorted(pi + (anchor,)))
                    beta = next_beta.get(tau_k, 0) + 1
                    if beta > params.keys_per_subset:
                        raise CounterExhausted(
                            f"key budget for subset {tau_k} exceeded "
                            f"{params.keys_per_subset}"
                        )
                    next_beta[tau_k] = beta
                    key_id = (tau_k, beta)
                    if not ablate_keys:
                        f.xor_into(row, placement.keys[key_id])
                    stacked.append(row)
                    key_ids.append(key_id)
                    row_meta.append({
                        "anchor": anchor,
                        "mu": mu,
                        "sigma": sigma,
                        "key_id": key_id,
                        "frag_ids": frag_ids,
                    })
                rows = [f.zeros(w) for _ in range(L)]
                for l in range(L):
                    for i in range(L):
                        f.axpy_into(rows[l], h_inv.at(l, i), stacked[i])
                log.blocks.append(Block(
                    subset=tuple(sorted(lam + pi)),
                    omega=s + 1,
                    key_ids=tuple(key_ids),
                    rows=rows,
                    meta={"lam": lam, "pi": pi, "s": s, "rows": row_meta},
                ))
    return log


def decode_user(params: FbParams, placement: FbPlacement, k: int,
                log: TransmitLog, channel: ChannelState, demand):
    f = params.field
    cache = placement.caches[k]
    want = demand[k - 1]
    if params.full_cache:
        return cache.data[(want, tuple(range(1, params.K + 1)))]

    def cached_fragment(owner, tau, sigma, slot):
        """Slice the cached sub-file the same way `owner` addresses it."""
        sub = cache.data[(demand[owner - 1], tau)]
        others = [u for u in range(1, params.K + 1) if u not in tau and u != owner]
        s_rank = rank_within(sigma, others)
        start = (s_rank * (params.L + params.t) + (slot - 1)) * params.width
        return sub[start : start + params.width]

    h_k = channel.row(k)
    recovered = {}
    for block in log.blocks:
        lam, pi = block.meta["lam"], block.meta["pi"]
        if k in lam:
            i = lam.index(k)
            info = block.meta["rows"][i]
            y = channel.receive(k, block.rows)
            key = cache.keys.get(info["key_id"])
            if key is None:
                raise MissingKey(f"user {k} lacks key {info['key_id']}")
            f.xor_into(y, key)
            mine = None
            for owner, tau, sigma, slot in info["frag_ids"]:
                if owner == k:
                    mine = (tau, sigma, slot)
                else:
                    f.xor_into(y, cached_fragment(owner, tau, sigma, slot))
            recovered[mine] = y
        elif k in pi:
            h_inv = channel.submatrix(lam).inv_matrix()
            gains = [dot(f, h_k, h_inv.col(i)) for i in range(params.L)]
            y = channel.receive(k, block.rows)
            mine = None
            mine_gain = 0
            for i, info in enumerate(block.meta["rows"]):
                key = cache.keys.get(info["key_id"])
                if key is None:
                    raise MissingKey(f"user {k} lacks key {info['key_id']}")
                f.axpy_into(y, gains[i], key)
                for owner, tau, sigma, slot in info["frag_ids"]:
                    if owner == k:
                        mine = (tau, sigma, slot)
                        mine_gain = gains[i]
                    else:
                        f.axpy_into(y, gains[i],
                                    cached_fragment(owner, tau, sigma, slot))
            f.scale_into(y, f.inv(mine_gain))
            recovered[mine] = y

    out = f.zeros(params.f)
    sub_w = _subfile_width(params)
    for rank, tau in enumerate(enumerate_subsets(params.K, params.t)):
        base = rank * sub_w
        if k in tau:
            out[base : base + sub_w] = cache.data[(want, tau)]
            continue
        others = [u for u in range(1, params.K + 1) if u not in tau and u != k]
        for sigma in subsets_of(others, params.L - 1):
            for slot in range(1, params.L + params.t + 1):
                frag = recovered.get((tau, sigma, slot))
                if frag is None:
                    raise DecodeFailure(
                        f"user {k} missing fragment {slot} of part {sigma} "
                        f"of sub-file {tau}"
                    )
                start = _fragment_start(params, k, tau, sigma, slot)
                out[start : start + params.width] = frag
    return out


def formula_point(params: FbParams) -> FormulaPoint:
    if params.full_cache:
        return FormulaPoint("feedback", params.K, params.L, params.N,
                            Fraction(params.N), Fraction(params.K),
                            Fraction(0), Fraction(params.N), Fraction(0), None)
    return formulas("feedback", params.K, params.L, params.N, t=params.t)
