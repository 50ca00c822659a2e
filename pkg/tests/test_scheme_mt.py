"""Baseline keyed multi-transmitter scheme: placement accounting,
delivery structure, and exact end-to-end decoding."""

from fractions import Fraction

import pytest

from cachecoder.errors import InvalidParams, MissingKey
from cachecoder.formulas import single_stream_secure_delay
from cachecoder.library import FileLibrary
from cachecoder.schemes import execute, make_params, random_demand
from cachecoder.schemes import mt
from cachecoder.subsets import binom


def small_params(**over):
    base = dict(K=3, L=2, N=3, t=1, f=3, seed=0)
    base.update(over)
    return mt.MtParams(**base)


def test_placement_accounting_by_hand():
    # K=3, L=2, N=3, t=1, f=3: 3 sub-files per file, 1 mini-file each;
    # per user: 3 data symbols + 2 key symbols = M f = 5
    p = small_params()
    lib = FileLibrary(p.field, p.N, p.f, seed=0)
    placement = mt.place(p, lib)
    for k in (1, 2, 3):
        cache = placement.caches[k]
        assert cache.data_symbols() == 3
        assert cache.key_symbols() == 2
        assert cache.total_symbols() == p.M * p.f == 5


@pytest.mark.parametrize("kw", [
    dict(K=4, L=2, N=4, t=2, f=12),
    dict(K=5, L=2, N=5, t=1, f=15),
    dict(K=6, L=3, N=6, t=2, f=90),
])
def test_cache_totals_equal_Mf(kw):
    p = mt.MtParams(seed=1, **kw)
    lib = FileLibrary(p.field, p.N, p.f, seed=1)
    placement = mt.place(p, lib)
    for cache in placement.caches.values():
        assert cache.total_symbols() == p.M * p.f


def test_full_cache_corner():
    p = small_params(t=3, f=1)
    run = execute("mt", p)
    assert run.report.measured_delay == 0
    assert not run.log.blocks
    assert run.report.measured_m_k == 0
    assert run.report.measured_m_d == p.N
    assert run.report.all_decoded


def test_delivery_counts_smallest_case():
    p = small_params()
    run = execute("mt", p)
    # one subset {1,2,3}, C(2,1)=2 repetitions of width f/3 = 1
    assert len(run.log.blocks) == 2
    assert run.log.total_columns == 2
    assert run.report.measured_delay == Fraction(2, 3)


def test_largest_t_single_subset():
    K, L = 5, 2
    t = K - L
    p = mt.MtParams(K=K, L=L, N=K, t=t, f=binom(K, t) * binom(K - t - 1, L - 1))
    run = execute("mt", p)
    subsets = {b.subset for b in run.log.blocks}
    assert subsets == {tuple(range(1, K + 1))}
    assert len(run.log.blocks) == binom(K - 1, t)


def test_delay_independent_of_demand():
    p = small_params()
    worst = execute("mt", p, demand=[1, 2, 3])
    same = execute("mt", p, demand=[1, 1, 1])
    assert worst.report.measured_delay == same.report.measured_delay
    assert len(worst.log.blocks) == len(same.log.blocks)
    assert same.report.all_decoded


def test_key_discipline_and_fragment_freshness():
    p = mt.MtParams(K=5, L=2, N=5, t=2, f=binom(5, 2) * binom(2, 1))
    run = execute("mt", p)
    used_keys = [kid for b in run.log.blocks for kid in b.key_ids]
    assert len(used_keys) == len(set(used_keys))
    # every key id appears in exactly one block column-group
    assert len(used_keys) == len(run.log.blocks)
    # no mini-file index reused across subsets
    seen = {}
    for block in run.log.blocks:
        if block.omega != 1:
            continue
        for (T, r), j in block.meta["frag_idx"].items():
            tau = tuple(u for u in T if u != r)
            assert seen.setdefault((r, tau, j), block.subset) == block.subset
    # each (r, tau) consumed every index exactly once
    per_pair = {}
    for (r, tau, j), _ in seen.items():
        per_pair.setdefault((r, tau), set()).add(j)
    for pair, js in per_pair.items():
        assert js == set(range(1, p.n_minifiles + 1))


def test_decode_50_random_trials():
    for seed in range(50):
        p = small_params(seed=seed)
        demand = random_demand(p.K, p.N, seed)
        run = execute("mt", p, demand=demand)
        assert run.report.all_decoded, f"seed {seed} demand {demand}"


def test_single_transmitter_reduction():
    for t in (1, 2, 3):
        K = 4
        p = mt.MtParams(K=K, L=1, N=K, t=t, f=binom(K, t))
        run = execute("mt", p)
        assert run.report.measured_delay == single_stream_secure_delay(K, K, p.M)
        # one unknown per block: width-1 systems
        assert p.reps == 1
        assert run.report.all_decoded


def test_missing_key_detected():
    p = small_params()
    run = execute("mt", p)
    victim = run.placement.caches[1]
    victim.keys.clear()
    with pytest.raises(MissingKey):
        mt.decode_user(p, run.placement, 1, run.log, run.channel, run.demand)


def test_invalid_params():
    with pytest.raises(InvalidParams):
        small_params(f=4)  # not a multiple of 3
    with pytest.raises(InvalidParams):
        small_params(t=2)  # K - L < t < K
    with pytest.raises(InvalidParams):
        mt.MtParams(K=3, L=2, N=2, t=1, f=3)  # N < K
