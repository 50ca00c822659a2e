"""Enumeration, ranking, and subpacketization counts."""

from fractions import Fraction
from itertools import combinations

import pytest

from cachecoder.subsets import (
    binom,
    enumerate_subsets,
    min_valid_f,
    rank_within,
    subset_rank,
    subset_unrank,
)


def pascal(n_max):
    rows = [[1]]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        rows.append(
            [1] + [prev[k - 1] + prev[k] for k in range(1, n)] + [1]
        )
    return rows


def test_binom_examples():
    assert binom(4, 0) == 1
    assert binom(4, 2) == 6
    assert binom(8, 3) == 56
    assert binom(3, -1) == 0
    assert binom(3, 4) == 0


def test_binom_against_pascal():
    rows = pascal(12)
    for n in range(13):
        for k in range(n + 1):
            assert binom(n, k) == rows[n][k]


def test_enumeration_examples():
    assert enumerate_subsets(3, 3) == [(1, 2, 3)]
    assert enumerate_subsets(3, 2) == [(1, 2), (1, 3), (2, 3)]
    assert enumerate_subsets(3, 0) == [()]


@pytest.mark.parametrize("K", range(1, 13))
def test_enumeration_matches_bitmask_bruteforce(K):
    for k in range(K + 1):
        brute = set()
        for mask in range(1 << K):
            if bin(mask).count("1") == k:
                brute.add(tuple(i + 1 for i in range(K) if mask >> i & 1))
        listed = enumerate_subsets(K, k)
        assert len(listed) == binom(K, k)
        assert set(listed) == brute
        assert listed == sorted(listed)


@pytest.mark.parametrize("K", range(1, 13))
def test_rank_unrank_roundtrip(K):
    for k in range(K + 1):
        for rank, subset in enumerate(enumerate_subsets(K, k)):
            assert subset_rank(subset, K) == rank
            assert subset_unrank(rank, K, k) == subset


def test_rank_examples():
    assert subset_rank((1, 2), 3) == 0
    assert subset_rank((2, 3), 3) == 2
    with pytest.raises(ValueError):
        subset_unrank(3, 3, 2)


def test_rank_within():
    pool = [2, 5, 9, 11]
    subsets = list(combinations(pool, 2))
    for i, s in enumerate(subsets):
        assert rank_within(s, pool) == i


def test_min_valid_f_examples():
    assert min_valid_f("mt", 3, 2, 1) == 3
    assert min_valid_f("feedback", 4, 2, 2) == 24
    assert min_valid_f("grouped", 4, 2, 2) == 2
    assert min_valid_f("decentralized", 3, 2, cache_prob=Fraction(1, 2)) == 16
    assert min_valid_f("mt", 4, 4, 4) == 1


def test_min_valid_f_decentralized_divides_all_fragments():
    K, L, q = 4, 2, Fraction(1, 3)
    f = min_valid_f("decentralized", K, L, cache_prob=q)
    for s in range(1, K + 1):
        d = min(s + L - 1, K)
        unit = q ** (s - 1) * (1 - q) ** (K - s + 1) / binom(K - s, d - s)
        assert (f * unit).denominator == 1
    assert (f * q**K).denominator == 1
