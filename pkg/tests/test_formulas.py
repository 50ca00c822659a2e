"""Closed-form engine: hand-derived values, reductions, identities,
regions, and gap directions."""

from fractions import Fraction

import pytest

from cachecoder.errors import OutOfRegion
from cachecoder import formulas as fm
from cachecoder.subsets import binom

F = Fraction


def test_mt_point_by_hand():
    # K=4, L=2, N=4, t=2: M = 3/4*2+1 = 5/2, delay = 4(1-1/2)/(2+2)
    point = fm.formulas("mt", 4, 2, 4, t=2)
    assert point.M == F(5, 2)
    assert point.delay == F(1, 2)
    assert point.m_k == F(1, 2)
    assert point.m_d == 2
    assert point.dof == 4


def test_mt_reduces_to_single_stream_row():
    for K, N in ((4, 4), (6, 8)):
        for t in range(1, K):
            M = fm.mt_m_from_t(K, N, t)
            assert fm.mt_delay(K, 1, N, M) == fm.single_stream_secure_delay(K, N, M)
            got = K * (1 - F(M - 1, N - 1)) / (1 + K * F(M - 1, N - 1))
            assert fm.mt_delay(K, 1, N, M) == got


def test_grouped_points_by_hand():
    point = fm.formulas("grouped", 4, 2, 4, t=2)
    assert point.M == 3
    assert point.delay == F(1, 2)
    assert point.m_k == 1

    assert fm.formulas("grouped", 8, 2, 8, t=4).delay == F(2, 3)
    assert fm.formulas("grouped", 4, 2, 4, t=0).delay == F(4, 2)


def test_feedback_points_by_hand():
    point = fm.formulas("feedback", 4, 2, 4, t=2)
    assert point.delay == F(1, 2)
    assert point.m_k == F(3, 4)
    assert fm.feedback_delay(8, 2, 2) == F(3, 2)


def test_feedback_key_storage_ratio_identity():
    for K in range(2, 9):
        for L in (1, 2, 3):
            if L > K:
                continue
            for t in range(0, K + 1):
                m_k_mt = F(K - t, K)
                assert fm.feedback_storage(K, L, K, t)[1] == \
                    F(L * (t + 1), t + L) * m_k_mt


def test_grouped_key_storage_is_L_times_baseline():
    for K in (4, 6, 8):
        for L in (1, 2):
            if K % L:
                continue
            for t in range(0, K + 1, L):
                M = fm.grouped_m_from_t(K, L, K, t)
                assert fm.grouped_storage(K, L, K, M)[1] == L * F(K - t, K)


def test_alt_key_assignment_never_better():
    for K in range(2, 9):
        for L in (1, 2, 3):
            for t in range(1, K - L + 1):
                alt = fm.mt_alt_m_k(K, L, t)
                base = F(K - t, K)
                assert alt >= base
                if binom(t + L - 1, t) == 1:
                    assert alt == base


def test_dec_point_matches_worked_example():
    point = fm.formulas("decentralized", 3, 2, 3, q=F(1, 2))
    assert point.delay == F(9, 16)
    assert point.m_k == F(1, 2)
    assert point.m_d == F(3, 2)
    assert point.M == 2


def test_dec_reduces_to_single_stream_row():
    for K in (3, 4, 6):
        for q in (F(1, 4), F(1, 2), F(2, 3)):
            M = (K - 1) * q + 1
            assert fm.dec_delay(K, 1, q) == \
                fm.single_stream_dec_secure_delay(K, K, M)
            assert fm.dec_m_k(K, 1, q) == 1 - q


def test_solve_cache_prob():
    assert fm.solve_cache_prob(3, 2, 3, 2) == F(1, 2)
    q = fm.solve_cache_prob(4, 2, 4, 2)
    residual = fm.dec_m_from_q(4, 2, 4, q) - 2
    assert abs(residual) < F(1, 10**12)
    with pytest.raises(OutOfRegion):
        fm.solve_cache_prob(4, 2, 4, F(9, 2))  # M >= N
    with pytest.raises(OutOfRegion):
        fm.solve_cache_prob(4, 2, 4, 1)


def test_solve_cache_prob_limit_toward_full_memory():
    q = fm.solve_cache_prob(4, 2, 4, F(399, 100))
    assert q > F(9, 10)


def test_operating_region_endpoints():
    lo, hi = fm.grouped_operating_region(8, 2, 8)
    assert lo == F(16, 5) == F("3.2")
    assert hi == F(29, 4) == F("7.25")
    lo1, _ = fm.grouped_operating_region(8, 1, 8)
    assert lo1 == F(16, 9)  # single-stream reduction of the band floor


def test_region_boundary_is_data_key_crossover():
    K, L, N = 8, 2, 8
    lo, _ = fm.grouped_operating_region(K, L, N)
    for M in [lo - F(1, 5), lo, lo + F(1, 5), 5, 7]:
        m_d, m_k = fm.grouped_storage(K, L, N, M)
        assert (m_d >= m_k) == (M >= lo)


def test_delay_strictly_decreasing_in_L():
    for K, N, M in ((8, 8, 3), (6, 8, F(5, 2))):
        delays = [fm.mt_delay(K, L, N, M) for L in (1, 2, 3, 4)]
        assert all(a > b for a, b in zip(delays, delays[1:]))


def test_secure_dominates_insecure_pointwise():
    for g in range(1, 10):
        M = 1 + 7 * F(g, 10)
        assert fm.mt_delay(8, 2, 8, M) >= fm.insecure_centralized_delay(8, 2, 8, M)
        assert fm.dec_delay(8, 2, fm.solve_cache_prob(8, 2, 8, M)) >= \
            fm.insecure_dec_delay(8, 2, 8, M)


def test_gap_shrinks_when_network_scales():
    small = fm.max_secure_insecure_gap("mt", 8, 2, 8)
    big = fm.max_secure_insecure_gap("mt", 20, 2, 20)
    assert big < small

    small_d = fm.max_secure_insecure_gap("decentralized", 8, 2, 8)
    big_d = fm.max_secure_insecure_gap("decentralized", 20, 2, 20)
    assert big_d < small_d


def test_centralized_decentralized_gap_shrinks():
    small = fm.max_centralized_decentralized_gap(8, 2, 8)
    big = fm.max_centralized_decentralized_gap(30, 2, 30)
    assert big < small


def test_conventional_baselines():
    assert fm.conventional_secure_delay(4, 4, F(5, 2)) == 4 * (1 - F(1, 2))
    assert fm.conventional_dec_secure_delay(4, F(1, 2)) == 2


def test_out_of_region_errors():
    with pytest.raises(OutOfRegion):
        fm.formulas("mt", 4, 2, 4, M=1)
    with pytest.raises(OutOfRegion):
        fm.formulas("grouped", 4, 2, 4, M=F(3, 2))
    with pytest.raises(OutOfRegion):
        fm.formulas("mt", 2, 3, 4, t=1)  # K < L
