"""Subset enumeration, combinadic ranking, and subpacketization counts.

User subsets are sorted tuples of 1-based ids.  A single global order
(lexicographic by member sequence) is used everywhere so encoders and
decoders agree on fragment addresses without any side channel.
"""

import itertools
from fractions import Fraction
from math import comb, lcm


def binom(n: int, k: int) -> int:
    """n choose k, zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def enumerate_subsets(K: int, k: int) -> list[tuple[int, ...]]:
    """All k-subsets of {1..K} as sorted tuples, lexicographic order."""
    return list(itertools.combinations(range(1, K + 1), k))


def subsets_of(universe, k: int) -> list[tuple[int, ...]]:
    """All k-subsets of an arbitrary sorted iterable, lexicographic order."""
    return list(itertools.combinations(sorted(universe), k))


def subset_rank(members: tuple[int, ...], K: int) -> int:
    """Position of a k-subset of {1..K} within enumerate_subsets(K, k)."""
    k = len(members)
    rank = 0
    prev = 0
    for i, c in enumerate(members):
        for v in range(prev + 1, c):
            rank += binom(K - v, k - i - 1)
        prev = c
    return rank


def subset_unrank(rank: int, K: int, k: int) -> tuple[int, ...]:
    """Inverse of subset_rank."""
    if not 0 <= rank < binom(K, k):
        raise ValueError(f"rank {rank} out of range for C({K},{k})")
    members = []
    v = 1
    for i in range(k):
        while True:
            block = binom(K - v, k - i - 1)
            if rank < block:
                members.append(v)
                v += 1
                break
            rank -= block
            v += 1
    return tuple(members)


def rank_within(members, universe) -> int:
    """Rank of a subset inside the lexicographic subsets of `universe`."""
    pool = sorted(universe)
    index = {u: i + 1 for i, u in enumerate(pool)}
    relabeled = tuple(index[m] for m in sorted(members))
    return subset_rank(relabeled, len(pool))


def dec_level_dof(K: int, L: int, s: int) -> int:
    """Served-set size at decentralized level s: min(s+L-1, K)."""
    return min(s + L - 1, K)


def min_valid_f(scheme: str, K: int, L: int, t: int | None = None,
                cache_prob: Fraction | None = None) -> int:
    """Smallest f making every fragment the scheme mandates an integer
    number of symbols.

    mt            C(K,t) sub-files x C(K-t-1,L-1) mini-files
    grouped       C(K/L, t/L) sub-files
    feedback      C(K,t) C(K-t-1,L-1) (L+t) fragments
    decentralized lcm of the per-level fragment denominators for the
                  equal-size placement (needs cache_prob)
    """
    if scheme == "mt":
        if t == K:
            return 1
        return binom(K, t) * binom(K - t - 1, L - 1)
    if scheme == "grouped":
        if t == K:
            return 1
        return binom(K // L, t // L)
    if scheme == "feedback":
        if t == K:
            return 1
        return binom(K, t) * binom(K - t - 1, L - 1) * (L + t)
    if scheme == "decentralized":
        q = Fraction(cache_prob)
        denoms = [(q**K).denominator]
        for s in range(1, K + 1):
            d = dec_level_dof(K, L, s)
            unit = q ** (s - 1) * (1 - q) ** (K - s + 1) / binom(K - s, d - s)
            denoms.append(unit.denominator)
        return lcm(*denoms)
    raise ValueError(f"unknown scheme kind {scheme!r}")
