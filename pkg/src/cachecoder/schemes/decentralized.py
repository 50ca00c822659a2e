"""Keyed decentralized multi-transmitter coded caching.

Placement is uncoordinated: each user caches every symbol of every file
independently with probability `cache_prob`, and the transmitters then
index sub-files by the realized cache masks.  Two placement modes
exist:

* ``ideal``      every mask of size i holds exactly
                 q^i (1-q)^(K-i) f symbols, which makes the measured
                 delay and storage match the closed forms as exact
                 rationals;
* ``bernoulli``  true per-symbol coin flips; delay then only
                 concentrates around the closed form, while decoding
                 stays exact (short fragments are zero-padded to the
                 block width and the padding is stripped after the
                 solve).

Key placement is centralized: one-time-pad streams are tied to
(level, subset) pairs and stored by every subset member.  Delivery
walks levels s = K..1; at level s it serves min(s+L-1,K)-subsets with
zero-forced random combinations of fresh fragments, masked by the same
key stream on all transmit rows.
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
from ..subsets import binom, dec_level_dof, enumerate_subsets, min_valid_f, subsets_of

SCHEME = "decentralized"

MODES = ("ideal", "bernoulli")


@dataclass(frozen=True)
class DecParams:
    K: int
    L: int
    N: int
    f: int
    cache_prob: Fraction
    mode: str = "ideal"
    m: int = 8
    poly: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cache_prob", Fraction(self.cache_prob))
        if not self.N >= self.K >= self.L >= 1:
            raise InvalidParams(
                f"need N >= K >= L >= 1, got N={self.N}, K={self.K}, L={self.L}"
            )
        if not 0 < self.cache_prob < 1:
            raise InvalidParams(
                f"cache_prob must be in (0,1), got {self.cache_prob}"
            )
        if self.mode not in MODES:
            raise InvalidParams(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "ideal":
            base = min_valid_f("decentralized", self.K, self.L,
                               cache_prob=self.cache_prob)
            if self.f < 1 or self.f % base:
                raise InvalidParams(
                    f"ideal mode needs f to be a positive multiple of "
                    f"min_valid_f={base}, got f={self.f}"
                )
        elif self.f < 1:
            raise InvalidParams(f"f must be positive, got {self.f}")

    @cached_property
    def field(self):
        return field_spec(self.m, self.poly)

    def level_dof(self, s: int) -> int:
        return dec_level_dof(self.K, self.L, s)

    def level_reps(self, s: int) -> int:
        return binom(self.level_dof(s) - 1, s - 1)

    def level_splits(self, s: int) -> int:
        """Fresh fragments each sub-file supplies at level s."""
        return binom(self.K - s, self.level_dof(s) - s)

    def ideal_mask_size(self, mask_len: int) -> int:
        q = self.cache_prob
        return int(self.f * q**mask_len * (1 - q) ** (self.K - mask_len))


def all_masks(K: int) -> list[tuple[int, ...]]:
    """Every subset of {1..K}, smallest first, lexicographic within a size."""
    masks = []
    for i in range(K + 1):
        masks.extend(enumerate_subsets(K, i))
    return masks


def chunk_bounds(length: int, parts: int, j: int) -> tuple[int, int]:
    """(start, size) of 1-based chunk j in a near-equal split of `length`."""
    base, rem = divmod(length, parts)
    start = (j - 1) * base + min(j - 1, rem)
    size = base + (1 if j <= rem else 0)
    return start, size


class DecPlacement:
    def __init__(self, params, caches, keys, key_widths, subfiles, layout, key_seed):
        self.params = params
        self.caches = caches
        self.keys = keys            # (s, S, beta) -> stream
        self.key_widths = key_widths  # (s, S) -> stream width
        self.subfiles = subfiles    # (n, mask) -> symbol array (transmitter view)
        self.layout = layout        # mask -> offset (ideal) | (n, mask) -> positions
        self.key_seed = key_seed


def place(params: DecParams, library: FileLibrary, key_seed=None) -> DecPlacement:
    if key_seed is None:
        key_seed = (params.seed, "keys")
    K, N, f = params.K, params.N, params.f
    q = params.cache_prob
    caches = {k: UserCache(k) for k in range(1, K + 1)}
    masks = all_masks(K)
    subfiles = {}

    if params.mode == "ideal":
        layout = {}
        offset = 0
        for mask in masks:
            layout[mask] = offset
            offset += params.ideal_mask_size(len(mask))
        assert offset == f
        for n in range(1, N + 1):
            for mask in masks:
                sub = library.slice(n, layout[mask], params.ideal_mask_size(len(mask)))
                subfiles[(n, mask)] = sub
                for k in mask:
                    caches[k].data[(n, mask)] = sub
    else:
        layout = {}
        prob = float(q)
        for n in range(1, N + 1):
            rng = derived_rng(params.seed, "mask", n)
            positions = {mask: [] for mask in masks}
            for pos in range(f):
                members = tuple(k for k in range(1, K + 1) if rng.random() < prob)
                positions[members].append(pos)
            data = library.file(n)
            for mask in masks:
                pos_list = positions[mask]
                layout[(n, mask)] = pos_list
                sub = params.field.zeros(len(pos_list))
                for i, p in enumerate(pos_list):
                    sub[i] = data[p]
                subfiles[(n, mask)] = sub
                for k in mask:
                    caches[k].data[(n, mask)] = sub

    keys = {}
    key_widths = {}
    for s in range(1, K + 1):
        d = params.level_dof(s)
        splits = params.level_splits(s)
        for rank, S in enumerate(enumerate_subsets(K, d)):
            if params.mode == "ideal":
                width = params.ideal_mask_size(s - 1) // splits
            else:
                longest = max(
                    len(subfiles[(n, mask)])
                    for n in range(1, N + 1)
                    for mask in subsets_of(S, s - 1)
                )
                width = -(-longest // splits)  # ceil
            key_widths[(s, S)] = width
            for beta in range(1, params.level_reps(s) + 1):
                stream = symbols(derived_rng(key_seed, "deckey", s, rank, beta),
                                 params.field.q, width)
                keys[(s, S, beta)] = stream
                for k in S:
                    caches[k].keys[(s, S, beta)] = stream
    return DecPlacement(params, caches, keys, key_widths, subfiles, layout, key_seed)


def _fragment(params: DecParams, placement: DecPlacement, n: int, mask,
              s: int, j: int):
    """Fresh fragment j of sub-file (n, mask) at level s, with true size."""
    sub = placement.subfiles[(n, mask)]
    start, size = chunk_bounds(len(sub), params.level_splits(s), j)
    return sub[start : start + size]


def deliver(params: DecParams, library: FileLibrary, placement: DecPlacement,
            demand, channel: ChannelState, coef_seed,
            ablate_keys: bool = False) -> TransmitLog:
    f = params.field
    log = TransmitLog(f=params.f)
    K, L = params.K, params.L
    fresh = {}  # (user, mask) -> fragments consumed

    for s in range(K, 0, -1):
        d = params.level_dof(s)
        splits = params.level_splits(s)
        for s_rank, S in enumerate(enumerate_subsets(K, d)):
            u_sets = subsets_of(S, s)
            frag_idx = {}
            frags = {}
            for U in u_sets:
                for r in U:
                    mask = tuple(u for u in U if u != r)
                    j = fresh.get((r, mask), 0) + 1
                    if j > splits:
                        raise CounterExhausted(
                            f"fragment counter for user {r}, mask {mask} "
                            f"exceeded {splits} at level {s}"
                        )
                    frag_idx[(U, r)] = j
                    frags[(U, r)] = _fragment(params, placement,
                                              demand[r - 1], mask, s, j)
            width = max((len(v) for v in frags.values()), default=0)
            if width:
                precoders = {U: zero_force(channel, S, U).u for U in u_sets}
                key_width = placement.key_widths[(s, S)]
                assert key_width >= width
                for omega in range(1, params.level_reps(s) + 1):
                    rows = [f.zeros(width) for _ in range(L)]
                    for U in u_sets:
                        rng = derived_rng(coef_seed, "phi", s, s_rank, U, omega)
                        combo = f.zeros(width)
                        for r in U:
                            coef = nonzero_symbol(rng, f.q)
                            frag = frags[(U, r)]
                            f.axpy_into(memoryview(combo)[: len(frag)], coef, frag)
                        u = precoders[U]
                        for l in range(L):
                            f.axpy_into(rows[l], u[l], combo)
                    key_id = (s, S, omega)
                    if not ablate_keys:
                        key = memoryview(placement.keys[key_id])[:width]
                        for l in range(L):
                            f.xor_into(rows[l], key)
                    log.blocks.append(Block(
                        subset=S,
                        omega=omega,
                        key_ids=(key_id,),
                        rows=rows,
                        meta={
                            "level": s,
                            "s_rank": s_rank,
                            "precoders": precoders,
                            "frag_idx": frag_idx,
                            "frag_lens": {ur: len(v) for ur, v in frags.items()},
                            "coef_seed": coef_seed,
                        },
                    ))
            for U in u_sets:
                for r in U:
                    mask = tuple(u for u in U if u != r)
                    fresh[(r, mask)] = fresh.get((r, mask), 0) + 1
    return log


def decode_user(params: DecParams, placement: DecPlacement, k: int,
                log: TransmitLog, channel: ChannelState, demand):
    f = params.field
    cache = placement.caches[k]
    want = demand[k - 1]
    h_k = channel.row(k)
    mask_scalar = 0
    for v in h_k:
        mask_scalar ^= v

    per_group = {}
    for block in log.blocks:
        if k in block.subset:
            per_group.setdefault((block.meta["level"], block.subset), []).append(block)

    recovered = {}  # (mask, j) -> fragment with padding stripped
    for (s, S), blocks in per_group.items():
        meta = blocks[0].meta
        u_sets_k = [U for U in subsets_of(S, s) if k in U]
        coef_rows = []
        rhs = []
        for block in blocks:
            y = channel.receive(k, block.rows)
            key_id = block.key_ids[0]
            key = cache.keys.get(key_id)
            if key is None:
                raise MissingKey(f"user {k} lacks key {key_id}")
            f.axpy_into(y, mask_scalar, memoryview(key)[: block.width])
            row = []
            for U in u_sets_k:
                a_U = dot(f, h_k, meta["precoders"][U])
                rng = derived_rng(meta["coef_seed"], "phi", s, meta["s_rank"],
                                  U, block.omega)
                phi_k = 0
                for r in U:
                    coef = nonzero_symbol(rng, f.q)
                    if r == k:
                        phi_k = coef
                    else:
                        mask = tuple(u for u in U if u != r)
                        sub = cache.data[(demand[r - 1], mask)]
                        start, size = chunk_bounds(len(sub),
                                                   params.level_splits(s),
                                                   meta["frag_idx"][(U, r)])
                        frag = sub[start : start + size]
                        f.axpy_into(memoryview(y)[: len(frag)],
                                    f.mul(a_U, coef), frag)
                row.append(f.mul(a_U, phi_k))
            coef_rows.append(row)
            rhs.append(y)
        try:
            streams = solve_streams(f, coef_rows, rhs)
        except Singular as exc:
            raise SingularDecode(
                f"user {k}, level {s}, subset {S}: {exc}; "
                f"re-deliver with new coefficients"
            ) from exc
        for U, stream in zip(u_sets_k, streams):
            mask = tuple(u for u in U if u != k)
            true_len = meta["frag_lens"][(U, k)]
            recovered[(mask, meta["frag_idx"][(U, k)])] = stream[:true_len]

    out = f.zeros(params.f)

    def emit(mask, content):
        if params.mode == "ideal":
            offset = placement.layout[mask]
            out[offset : offset + len(content)] = content
        else:
            for i, pos in enumerate(placement.layout[(want, mask)]):
                out[pos] = content[i]

    for mask in all_masks(params.K):
        if k in mask:
            emit(mask, cache.data[(want, mask)])
            continue
        s = len(mask) + 1
        splits = params.level_splits(s)
        if params.mode == "ideal":
            expect = params.ideal_mask_size(len(mask))
        else:
            expect = len(placement.layout[(want, mask)])
        parts = []
        for j in range(1, splits + 1):
            frag = recovered.get((mask, j))
            if frag is None:
                _, size = chunk_bounds(expect, splits, j)
                if size:
                    raise DecodeFailure(
                        f"user {k} never received fragment {j} of mask {mask}"
                    )
                frag = f.zeros(0)
            parts.append(frag)
        content = f.zeros(expect)
        at = 0
        for frag in parts:
            content[at : at + len(frag)] = frag
            at += len(frag)
        if at != expect:
            raise DecodeFailure(
                f"user {k} reassembled {at} of {expect} symbols for mask {mask}"
            )
        emit(mask, content)
    return out


def formula_point(params: DecParams) -> FormulaPoint:
    return formulas("decentralized", params.K, params.L, params.N,
                    q=params.cache_prob)
