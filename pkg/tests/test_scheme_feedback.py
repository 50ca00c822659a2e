"""Reduced-feedback scheme: channel inversion, chunk rotation, and the
double fragment split."""

from fractions import Fraction

import pytest

from cachecoder.errors import InvalidParams
from cachecoder.formulas import single_stream_secure_delay
from cachecoder.gf import dot
from cachecoder.library import FileLibrary
from cachecoder.schemes import execute, random_demand
from cachecoder.schemes import feedback
from cachecoder.subsets import binom


def p_f(K, L, t):
    return binom(K, t) * binom(K - t - 1, L - 1) * (L + t)


def test_subpacketization_and_key_sizes():
    p = feedback.FbParams(K=4, L=2, N=4, t=2, f=24)
    assert p.subpacketization == 24
    assert p.keys_per_subset == binom(1, 1) * 3 * 2
    assert p.M == Fraction(2) + Fraction(3, 4)

    lib = FileLibrary(p.field, p.N, p.f, seed=0)
    placement = feedback.place(p, lib)
    for cache in placement.caches.values():
        assert len(cache.keys) == binom(3, 2) * p.keys_per_subset
        assert cache.key_symbols() == Fraction(3, 4) * p.f
        assert cache.total_symbols() == p.M * p.f


def test_vector_and_delay_counts():
    p = feedback.FbParams(K=4, L=2, N=4, t=2, f=24)
    run = execute("feedback", p)
    # C(4,2) lambda choices x C(2,2) pi choices x 2 inner iterations
    assert len(run.log.blocks) == 12
    assert run.report.measured_delay == Fraction(1, 2)

    p8 = feedback.FbParams(K=8, L=2, N=8, t=2, f=binom(8, 2) * binom(5, 1) * 4)
    run8 = execute("feedback", p8)
    assert run8.report.measured_delay == Fraction(3, 2)


def test_chunk_rotation_links_every_pair_once():
    p = feedback.FbParams(K=6, L=2, N=6, t=2, f=p_f(6, 2, 2))
    run = execute("feedback", p)
    per_pair = {}
    for block in run.log.blocks:
        lam, pi = block.meta["lam"], block.meta["pi"]
        for info in block.meta["rows"]:
            chunk = tuple(u for u in info["mu"] if u != info["anchor"])
            per_pair.setdefault((lam, pi), []).append((info["anchor"], chunk))
    chunk_count = p.L
    for (lam, pi), pairs in per_pair.items():
        assert len(pairs) == p.L * p.L
        assert len(set(pairs)) == p.L * p.L  # each anchor meets each chunk once


def test_fragment_slots_fully_consumed():
    p = feedback.FbParams(K=5, L=1, N=5, t=2, f=p_f(5, 1, 2))
    run = execute("feedback", p)
    slots = {}
    for block in run.log.blocks:
        for info in block.meta["rows"]:
            for (k, tau, sigma, r) in info["frag_ids"]:
                slots.setdefault((k, tau, sigma), set()).add(r)
    for key, used in slots.items():
        assert used == set(range(1, p.L + p.t + 1)), key


def test_every_key_used_exactly_once():
    p = feedback.FbParams(K=4, L=2, N=4, t=2, f=24)
    run = execute("feedback", p)
    used = [kid for b in run.log.blocks for kid in b.key_ids]
    assert len(used) == len(set(used))
    assert len(used) == len(run.placement.keys)


def test_lambda_member_reads_own_row():
    p = feedback.FbParams(K=4, L=2, N=4, t=2, f=24, seed=11)
    run = execute("feedback", p)
    ch = run.channel
    f = p.field
    block = run.log.blocks[0]
    lam = block.meta["lam"]
    h_inv = ch.submatrix(lam).inv_matrix()
    for pos, k in enumerate(lam):
        gains = [dot(f, ch.row(k), h_inv.col(i)) for i in range(p.L)]
        want = [0] * p.L
        want[pos] = 1
        assert gains == want


def test_decode_50_random_trials():
    for seed in range(50):
        p = feedback.FbParams(K=4, L=2, N=4, t=2, f=24, seed=seed)
        demand = random_demand(p.K, p.N, seed + 2000)
        run = execute("feedback", p, demand=demand)
        assert run.report.all_decoded, f"seed {seed} demand {demand}"


def test_single_transmitter_reduction():
    K = 5
    for t in (1, 2, 3):
        p = feedback.FbParams(K=K, L=1, N=K, t=t, f=p_f(K, 1, t))
        run = execute("feedback", p)
        assert run.report.measured_delay == Fraction(K - t, 1 + t)
        assert run.report.measured_delay == single_stream_secure_delay(K, K, p.M)
        assert run.report.all_decoded


def test_zero_cache_parameter():
    p = feedback.FbParams(K=4, L=2, N=4, t=0, f=p_f(4, 2, 0))
    run = execute("feedback", p)
    assert run.report.measured_delay == Fraction(p.K, p.L)
    assert run.report.measured_m_d == 0
    assert run.report.measured_m_k == 1
    assert run.report.all_decoded


def test_full_cache_corner():
    p = feedback.FbParams(K=4, L=2, N=4, t=4, f=1)
    run = execute("feedback", p)
    assert run.report.measured_delay == 0
    assert run.report.all_decoded


def test_invalid_params():
    with pytest.raises(InvalidParams):
        feedback.FbParams(K=4, L=2, N=4, t=1, f=24)  # L does not divide t
    with pytest.raises(InvalidParams):
        feedback.FbParams(K=4, L=2, N=4, t=2, f=23)  # f not multiple of 24
