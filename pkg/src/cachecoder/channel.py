"""The finite-field linear network and its zero-forcing precoders.

Receive vectors are fixed linear transforms of the transmit vector:
user k sees h_k^T s and the eavesdropper sees h_e^T s.  The transfer
matrix is sampled uniformly and re-drawn until every set of L distinct
user rows is invertible, which makes the null-space precoders below
well defined even in small fields.  The state never changes during a
delivery.
"""

from array import array
from dataclasses import dataclass

from .errors import DegenerateField, NonOrthogonalityFailure
from .gf import FieldMatrix, FieldSpec, dot
from .rng import derived_rng, nonzero_symbol
from .subsets import enumerate_subsets


@dataclass(frozen=True)
class Precoder:
    """Transmit direction u with h_j^T u = 0 on `zeroed` and != 0 on `target`."""

    u: tuple[int, ...]
    target: tuple[int, ...]
    zeroed: tuple[int, ...]


class ChannelState:
    """Sampled network: K x L user matrix plus the eavesdropper row."""

    def __init__(self, field: FieldSpec, H_r: FieldMatrix, h_e: list[int], seed: int):
        self.field = field
        self.K = H_r.rows
        self.L = H_r.cols
        self.H_r = H_r
        self.h_e = list(h_e)
        self.seed = seed

    def row(self, k: int) -> list[int]:
        """Channel row of user k (1-based)."""
        return self.H_r.row(k - 1)

    def submatrix(self, users) -> FieldMatrix:
        return FieldMatrix.from_rows(self.field, [self.row(k) for k in users])

    def transmit_rows(self, rows: list[array]):
        """Apply the network to an L-row symbol block.

        Returns (per-user receive streams, eavesdropper stream).
        """
        f = self.field
        width = len(rows[0]) if rows else 0
        y_users = []
        for k in range(1, self.K + 1):
            acc = f.zeros(width)
            for l, h in enumerate(self.row(k)):
                f.axpy_into(acc, h, rows[l])
            y_users.append(acc)
        y_e = f.zeros(width)
        for l, h in enumerate(self.h_e):
            f.axpy_into(y_e, h, rows[l])
        return y_users, y_e

    def receive(self, k: int, rows: list[array]) -> array:
        """Stream user k observes for one transmitted block."""
        f = self.field
        acc = f.zeros(len(rows[0]) if rows else 0)
        for l, h in enumerate(self.row(k)):
            f.axpy_into(acc, h, rows[l])
        return acc

    def eavesdrop(self, rows: list[array]) -> array:
        f = self.field
        acc = f.zeros(len(rows[0]) if rows else 0)
        for l, h in enumerate(self.h_e):
            f.axpy_into(acc, h, rows[l])
        return acc


def sample_channel(K: int, L: int, field: FieldSpec, seed: int,
                   max_attempts: int = 1000) -> ChannelState:
    """Uniform i.i.d. channel, rejected until every L user rows are
    linearly independent and the eavesdropper row is nonzero."""
    if not K >= L >= 1:
        raise ValueError(f"need K >= L >= 1, got K={K}, L={L}")
    rng = derived_rng(seed, "channel", K, L, field.m, field.poly)
    for _ in range(max_attempts):
        H = FieldMatrix(
            field, K, L, [rng.randrange(field.q) for _ in range(K * L)]
        )
        h_e = [rng.randrange(field.q) for _ in range(L)]
        if all(v == 0 for v in h_e):
            continue
        ok = all(
            H_sub.rank() == L
            for H_sub in (
                FieldMatrix.from_rows(field, [H.row(u - 1) for u in users])
                for users in enumerate_subsets(K, L)
            )
        )
        if ok:
            return ChannelState(field, H, h_e, seed)
    raise DegenerateField(
        f"no full-rank {K}x{L} channel over GF(2^{field.m}) after {max_attempts} draws"
    )


def zero_force(channel: ChannelState, S, T, tries: int = 100) -> Precoder:
    """Precoder for serving T inside the block of S.

    u lies in the null space of the channel rows of S \\ T; the first
    deterministic basis vector is used unless it is orthogonal to some
    target row, in which case seeded random basis combinations are
    tried.  The returned precoder is re-verified by multiplication.
    """
    f = channel.field
    S, T = tuple(sorted(S)), tuple(sorted(T))
    zeroed = tuple(u for u in S if u not in T)
    if len(zeroed) > channel.L - 1:
        raise ValueError("more rows to cancel than the null space allows")
    if zeroed:
        A = channel.submatrix(zeroed)
        basis = A.null_space()
    else:
        basis = FieldMatrix.identity(f, channel.L)

    def ok(u):
        return all(dot(f, channel.row(j), u) != 0 for j in T)

    candidates = [basis.col(c) for c in range(basis.cols)]
    for u in candidates:
        if ok(u):
            return _verified(channel, u, T, zeroed)
    rng = derived_rng(channel.seed, "zf", S, T)
    for _ in range(tries):
        u = [0] * channel.L
        for c in range(basis.cols):
            coef = nonzero_symbol(rng, f.q)
            for i in range(channel.L):
                u[i] ^= f.mul(coef, basis.at(i, c))
        if any(u) and ok(u):
            return _verified(channel, u, T, zeroed)
    raise NonOrthogonalityFailure(
        f"no precoder separates T={T} from {zeroed} under this channel"
    )


def _verified(channel, u, T, zeroed) -> Precoder:
    f = channel.field
    for j in zeroed:
        if dot(f, channel.row(j), u) != 0:
            raise NonOrthogonalityFailure(f"precoder not orthogonal to user {j}")
    for j in T:
        if dot(f, channel.row(j), u) == 0:
            raise NonOrthogonalityFailure(f"precoder orthogonal to target user {j}")
    return Precoder(u=tuple(u), target=tuple(T), zeroed=tuple(zeroed))
