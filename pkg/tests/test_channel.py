"""Channel sampling, zero-forcing, and the receive map."""

from array import array

import pytest

from cachecoder.channel import ChannelState, sample_channel, zero_force
from cachecoder.errors import DegenerateField, NonOrthogonalityFailure
from cachecoder.gf import FieldMatrix, dot, field_spec
from cachecoder.subsets import enumerate_subsets


def test_forced_single_entry_over_gf2():
    f = field_spec(1)
    ch = sample_channel(1, 1, f, seed=0)
    assert ch.H_r.data == [1]
    assert ch.h_e == [1]


def test_sampling_is_deterministic():
    f = field_spec(8)
    a = sample_channel(4, 2, f, seed=7)
    b = sample_channel(4, 2, f, seed=7)
    assert a.H_r == b.H_r and a.h_e == b.h_e
    c = sample_channel(4, 2, f, seed=8)
    assert a.H_r != c.H_r or a.h_e != c.h_e


def test_every_row_pair_invertible():
    f = field_spec(8)
    ch = sample_channel(4, 2, f, seed=3)
    for users in enumerate_subsets(4, 2):
        assert ch.submatrix(users).rank() == 2
    assert any(ch.h_e)


def test_impossible_topology_raises():
    # only 3 pairwise-independent nonzero vectors exist in GF(2)^2
    with pytest.raises(DegenerateField):
        sample_channel(4, 2, field_spec(1), seed=0, max_attempts=50)


def test_zero_force_kernel_by_hand():
    f = field_spec(8)
    H = FieldMatrix.from_rows(f, [[1, 0], [0, 1]])
    ch = ChannelState(f, H, [1, 1], seed=0)
    pre = zero_force(ch, (1, 2), (2,))
    # u must kill h_1 = [1,0], so u = [0, c]
    assert pre.u[0] == 0 and pre.u[1] != 0
    assert dot(f, ch.row(1), pre.u) == 0
    assert dot(f, ch.row(2), pre.u) != 0


def test_zero_force_no_constraints():
    f = field_spec(8)
    ch = sample_channel(3, 2, f, seed=1)
    pre = zero_force(ch, (1, 2, 3), (1, 2, 3))
    assert pre.zeroed == ()
    for j in (1, 2, 3):
        assert dot(f, ch.row(j), pre.u) != 0


def test_zero_force_reverified_on_random_channels():
    f = field_spec(8)
    for seed in range(10):
        ch = sample_channel(5, 3, f, seed=seed)
        for S in enumerate_subsets(5, 4):
            for T in enumerate_subsets(5, 2):
                if not set(T) <= set(S):
                    continue
                if len(set(S) - set(T)) > 2:
                    continue
                pre = zero_force(ch, S, T)
                for j in pre.zeroed:
                    assert dot(f, ch.row(j), pre.u) == 0
                for j in T:
                    assert dot(f, ch.row(j), pre.u) != 0


def test_zero_force_failure_surfaces():
    # hand-built degenerate channel: both rows equal, so the direction
    # that cancels user 1 is also orthogonal to user 2
    f = field_spec(1)
    H = FieldMatrix.from_rows(f, [[1, 0], [1, 0]])
    ch = ChannelState(f, H, [1, 0], seed=0)
    with pytest.raises(NonOrthogonalityFailure):
        zero_force(ch, (1, 2), (2,), tries=5)


def test_transmit_examples():
    f = field_spec(8)
    H = FieldMatrix.identity(f, 2)
    ch = ChannelState(f, H, [1, 2], seed=0)
    zero_block = [f.zeros(3), f.zeros(3)]
    ys, ye = ch.transmit_rows(zero_block)
    assert all(not any(y) for y in ys) and not any(ye)
    s = [array("H", [1, 2, 3]), array("H", [4, 5, 6])]
    ys, _ = ch.transmit_rows(s)
    assert ys[0] == s[0] and ys[1] == s[1]

    f2 = field_spec(1)
    ch2 = ChannelState(f2, FieldMatrix.from_rows(f2, [[1, 1]]), [1], seed=0)
    ys, _ = ch2.transmit_rows([array("H", [1]), array("H", [1])])
    assert list(ys[0]) == [0]


def test_receive_matches_transmit_rows():
    f = field_spec(8)
    ch = sample_channel(3, 2, f, seed=9)
    rows = [array("H", [7, 8, 9]), array("H", [1, 0, 255])]
    ys, ye = ch.transmit_rows(rows)
    for k in (1, 2, 3):
        assert ch.receive(k, rows) == ys[k - 1]
    assert ch.eavesdrop(rows) == ye
