"""Closed-form coding-delay and key-storage expressions, exact in Q.

Every quantity here is a Fraction; floats never enter.  Covers the four
keyed multi-transmitter schemes, their insecure counterparts, the
single-stream reductions used as cross-checks, operating regions, and
the secure-vs-insecure gap evaluations.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import NoRoot, OutOfRegion
from .subsets import binom, dec_level_dof

Rat = Fraction


@dataclass(frozen=True)
class FormulaPoint:
    scheme: str
    K: int
    L: int
    N: int
    M: Fraction
    t_or_q: Fraction
    delay: Fraction
    m_d: Fraction
    m_k: Fraction
    dof: int | None


# -- centralized keyed schemes ---------------------------------------


def mt_delay(K: int, L: int, N: int, M) -> Fraction:
    """Keyed multi-transmitter delay: K(1-(M-1)/(N-1)) / (L+K(M-1)/(N-1))."""
    M = Rat(M)
    share = Rat(M - 1, N - 1)
    return (K * (1 - share)) / (L + K * share)


def mt_storage(K: int, N: int, M) -> tuple[Fraction, Fraction]:
    """(m_d, m_k) split for the baseline keyed scheme."""
    M = Rat(M)
    t = Rat(K * (M - 1), N - 1)
    return Rat(N) * t / K, 1 - t / K


def mt_m_from_t(K: int, N: int, t: int) -> Fraction:
    return Rat((N - 1) * t, K) + 1


def grouped_delay(K: int, L: int, N: int, M) -> Fraction:
    """Grouped (reduced-subpacketization) delay with key cost included."""
    M = Rat(M)
    share = Rat(M - L, N - L)
    return (K * (1 - share)) / (L + K * share)


def grouped_storage(K: int, L: int, N: int, M) -> tuple[Fraction, Fraction]:
    M = Rat(M)
    t = Rat(K * (M - L), N - L)
    return Rat(N) * t / K, L * (1 - t / K)


def grouped_m_from_t(K: int, L: int, N: int, t: int) -> Fraction:
    return Rat(N * t, K) + L * (1 - Rat(t, K))


def feedback_delay(K: int, L: int, t) -> Fraction:
    """Receiver-side-inversion scheme delay: (K-t)/(L+t)."""
    t = Rat(t)
    return (K - t) / (L + t)


def feedback_storage(K: int, L: int, N: int, t) -> tuple[Fraction, Fraction]:
    t = Rat(t)
    m_k = L * (K - t) * (t + 1) / (K * (t + L))
    return Rat(N) * t / K, m_k


def feedback_m_from_t(K: int, L: int, N: int, t: int) -> Fraction:
    m_d, m_k = feedback_storage(K, L, N, t)
    return m_d + m_k


# -- decentralized keyed scheme --------------------------------------


def dec_delay(K: int, L: int, q) -> Fraction:
    """Level sum of block counts times block widths, per file unit."""
    q = Rat(q)
    total = Rat(0)
    for s in range(1, K + 1):
        d = dec_level_dof(K, L, s)
        total += (
            Rat(binom(K, d) * binom(d - 1, s - 1), binom(K - s, d - s))
            * q ** (s - 1)
            * (1 - q) ** (K - s + 1)
        )
    return total


def dec_m_k(K: int, L: int, q) -> Fraction:
    """Key storage of the decentralized scheme at caching probability q."""
    q = Rat(q)
    total = Rat(0)
    for s in range(1, K + 1):
        d = dec_level_dof(K, L, s)
        total += (
            Rat(binom(K - 1, d - 1) * binom(d - 1, s - 1), binom(K - s, d - s))
            * q ** (s - 1)
            * (1 - q) ** (K - s + 1)
        )
    return total


def dec_m_from_q(K: int, L: int, N: int, q) -> Fraction:
    q = Rat(q)
    return N * q + dec_m_k(K, L, q)


def solve_cache_prob(K: int, L: int, N: int, M,
                     tol: Fraction = Fraction(1, 10**12)) -> Fraction:
    """Caching probability q with N q + m_k(q) = M, found by bisection.

    Exact rational arithmetic throughout; dyadic midpoints keep the
    iterates small.  The bracket is probed on a grid first; if several
    sign changes appear the smallest root is taken.  A nearby small
    rational is returned when it is an exact root (so M=2 at K=N=3,
    L=2 yields exactly 1/2).
    """
    M = Rat(M)
    if not 1 < M < N:
        raise OutOfRegion(f"decentralized scheme needs 1 < M < N, got M={M}")

    def g(q):
        return dec_m_from_q(K, L, N, q) - M

    grid = 64
    lo = hi = None
    prev_q, prev_v = Rat(0), g(Rat(0))
    for i in range(1, grid + 1):
        cur_q = Rat(i, grid)
        cur_v = g(cur_q) if i < grid else N - M  # g(1) = N - M
        if cur_v == 0:
            return cur_q
        if prev_v < 0 < cur_v:
            lo, hi = prev_q, cur_q
            break
        prev_q, prev_v = cur_q, cur_v
    if lo is None:
        raise NoRoot(f"no sign change for M={M} on (0,1)")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        # snap to a small nearby rational when it solves exactly
        nice = mid.limit_denominator(10**6)
        if lo < nice < hi and g(nice) == 0:
            return nice
        v = g(mid)
        if v == 0:
            return mid
        if v < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# -- insecure counterparts and single-stream rows --------------------


def insecure_centralized_delay(K: int, L: int, N: int, M) -> Fraction:
    """Unkeyed multi-transmitter delay K(1-M/N)/(L+KM/N); also the
    reduced-feedback counterpart since t = KM/N there."""
    M = Rat(M)
    share = Rat(M, N)
    return (K * (1 - share)) / (L + K * share)


def insecure_dec_delay(K: int, L: int, N: int, M) -> Fraction:
    """Unkeyed decentralized counterpart: all memory holds data, q = M/N."""
    return dec_delay(K, L, Rat(M, N))


def single_stream_secure_delay(K: int, N: int, M) -> Fraction:
    """Keyed single-transmitter row: K(1-(M-1)/(N-1))/(1+K(M-1)/(N-1))."""
    return mt_delay(K, 1, N, M)


def single_stream_dec_secure_delay(K: int, N: int, M) -> Fraction:
    """Keyed single-transmitter decentralized row, min-clamped form."""
    M = Rat(M)
    p = Rat(M - 1, N - 1)
    if p == 0:
        return Rat(K)
    factor = min((1 - (1 - p) ** K) / (K * p), Rat(1))
    return factor * K * (1 - p)


def conventional_secure_delay(K: int, N: int, M) -> Fraction:
    """Encrypted unicast baseline: one private key per user, K(1-(M-1)/(N-1))."""
    return K * (1 - Rat(M - 1, N - 1))


def conventional_dec_secure_delay(K: int, q) -> Fraction:
    """Decentralized encrypted unicast baseline: K(1-q)."""
    return K * (1 - Rat(q))


def mt_alt_m_k(K: int, L: int, t: int) -> Fraction:
    """Key storage if keys were tied to (t+1)-subsets instead of blocks;
    never better than the per-block assignment."""
    return Rat(K - t, K) * binom(t + L - 1, t)


# -- regions ----------------------------------------------------------


def grouped_operating_region(K: int, L: int, N: int) -> tuple[Fraction, Fraction]:
    """Memory band where data dominates keys yet no key is shared by all
    users: [2NL/(N+L), (K-1)(N-L)/K + L]."""
    if K <= L:
        raise OutOfRegion(f"need K > L, got K={K}, L={L}")
    low = Rat(2 * N * L, N + L)
    high = Rat((K - 1) * (N - L), K) + L
    return low, high


def _require(cond: bool, msg: str):
    if not cond:
        raise OutOfRegion(msg)


def formulas(scheme: str, K: int, L: int, N: int, *, t=None, M=None,
             q=None) -> FormulaPoint:
    """Exact delay and storage split for one scheme at one point.

    Centralized schemes accept the cache parameter t (integer grid) or
    a rational memory size M; the decentralized scheme accepts q or M.
    Raises OutOfRegion naming the violated constraint.
    """
    _require(K >= L >= 1, f"need K >= L >= 1, got K={K}, L={L}")
    _require(N >= K, f"need N >= K, got N={N}, K={K}")

    if scheme == "mt":
        if M is None:
            M = mt_m_from_t(K, N, t)
        M = Rat(M)
        _require(1 < M <= N, f"mt scheme needs 1 < M <= N, got M={M}")
        t_eff = Rat(K * (M - 1), N - 1)
        m_d, m_k = mt_storage(K, N, M)
        dof = int(t_eff) + L if t_eff.denominator == 1 else None
        return FormulaPoint("mt", K, L, N, M, t_eff, mt_delay(K, L, N, M),
                            m_d, m_k, dof)
    if scheme == "grouped":
        if M is None:
            M = grouped_m_from_t(K, L, N, t)
        M = Rat(M)
        _require(L <= M <= N, f"grouped scheme needs L <= M <= N, got M={M}")
        t_eff = Rat(K * (M - L), N - L)
        m_d, m_k = grouped_storage(K, L, N, M)
        dof = int(t_eff) + L if t_eff.denominator == 1 else None
        return FormulaPoint("grouped", K, L, N, M, t_eff,
                            grouped_delay(K, L, N, M), m_d, m_k, dof)
    if scheme == "feedback":
        if t is None:
            _require(M is not None, "feedback point needs t")
            t = _feedback_t_from_m(K, L, N, Rat(M))
        t_eff = Rat(t)
        _require(0 <= t_eff <= K, f"feedback scheme needs 0 <= t <= K, got t={t}")
        m_d, m_k = feedback_storage(K, L, N, t_eff)
        M_eff = m_d + m_k
        dof = int(t_eff) + L if t_eff.denominator == 1 else None
        return FormulaPoint("feedback", K, L, N, M_eff, t_eff,
                            feedback_delay(K, L, t_eff), m_d, m_k, dof)
    if scheme == "decentralized":
        if q is None:
            _require(M is not None, "decentralized point needs q or M")
            q = solve_cache_prob(K, L, N, M)
        q = Rat(q)
        _require(0 < q < 1, f"caching probability must be in (0,1), got {q}")
        m_k = dec_m_k(K, L, q)
        m_d = N * q
        return FormulaPoint("decentralized", K, L, N, m_d + m_k, q,
                            dec_delay(K, L, q), m_d, m_k, None)
    raise ValueError(f"unknown scheme {scheme!r}")


def _feedback_t_from_m(K: int, L: int, N: int, M: Fraction) -> Fraction:
    """Rational t with m_d(t) + m_k(t) = M (monotone bisection on [0, K])."""
    lo, hi = Rat(0), Rat(K)
    f_lo = feedback_m_from_t(K, L, N, lo) - M
    f_hi = feedback_m_from_t(K, L, N, hi) - M
    if f_lo > 0 or f_hi < 0:
        raise OutOfRegion(f"feedback memory M={M} outside [{1}, {N}]")
    for _ in range(200):
        mid = (lo + hi) / 2
        nice = mid.limit_denominator(10**6)
        if lo < nice < hi and feedback_m_from_t(K, L, N, nice) == M:
            return nice
        v = feedback_m_from_t(K, L, N, mid) - M
        if v == 0:
            return mid
        if v < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < Rat(1, 10**15):
            break
    return (lo + hi) / 2


# -- gap evaluations ---------------------------------------------------


def secure_insecure_gap(scheme: str, K: int, L: int, N: int, M) -> Fraction:
    """Secure-minus-insecure delay at matched memory."""
    M = Rat(M)
    if scheme == "mt":
        return mt_delay(K, L, N, M) - insecure_centralized_delay(K, L, N, M)
    if scheme == "grouped":
        return grouped_delay(K, L, N, M) - insecure_centralized_delay(K, L, N, M)
    if scheme == "feedback":
        t_sec = _feedback_t_from_m(K, L, N, M)
        return feedback_delay(K, L, t_sec) - insecure_centralized_delay(K, L, N, M)
    if scheme == "decentralized":
        q = solve_cache_prob(K, L, N, M)
        return dec_delay(K, L, q) - insecure_dec_delay(K, L, N, M)
    raise ValueError(f"unknown scheme {scheme!r}")


def fraction_grid(lo: Fraction, hi: Fraction, points: int) -> list[Fraction]:
    """Evenly spaced rationals on [lo, hi], endpoints included."""
    lo, hi = Rat(lo), Rat(hi)
    if points == 1:
        return [lo]
    step = (hi - lo) / (points - 1)
    return [lo + i * step for i in range(points)]


DEFAULT_GAP_FRACTIONS = tuple(Fraction(i, 10) for i in range(3, 10))


def max_secure_insecure_gap(scheme: str, K: int, L: int, N: int,
                            fractions_of_range=None) -> Fraction:
    """Largest secure-vs-insecure gap over a memory grid matched by the
    position of M inside the scheme's feasible band.

    The default band starts at 0.3: right at the memory floor the keyed
    schemes have no data-caching gain yet, so their absolute handicap
    grows with the network instead of shrinking.
    """
    if fractions_of_range is None:
        fractions_of_range = DEFAULT_GAP_FRACTIONS
    gaps = []
    for g in fractions_of_range:
        M = 1 + (N - 1) * Rat(g) if scheme != "grouped" else L + (N - L) * Rat(g)
        gaps.append(secure_insecure_gap(scheme, K, L, N, M))
    return max(gaps)


def max_centralized_decentralized_gap(K: int, L: int, N: int,
                                      fractions_of_range=None) -> Fraction:
    """Largest |decentralized - centralized| secure-delay gap over a
    matched memory grid (same band convention as above)."""
    if fractions_of_range is None:
        fractions_of_range = DEFAULT_GAP_FRACTIONS
    gaps = []
    for g in fractions_of_range:
        M = 1 + (N - 1) * Rat(g)
        q = solve_cache_prob(K, L, N, M)
        gaps.append(abs(dec_delay(K, L, q) - mt_delay(K, L, N, M)))
    return max(gaps)
