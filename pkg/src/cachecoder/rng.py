"""Deterministic derived random streams.

Every random quantity in a run (file contents, channel entries, keys,
combination coefficients) comes from its own `random.Random` instance
whose seed is derived by hashing a tag tuple.  Streams are therefore
independent of evaluation order, reproducible across platforms, and
individual sources (e.g. keys) can be re-rolled without disturbing the
others.
"""

import hashlib
import random
from array import array


def derived_rng(*tags) -> random.Random:
    """Random generator keyed by a tuple of ints/strings/tuples."""
    digest = hashlib.sha256(repr(tags).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def symbols(rng: random.Random, q: int, n: int) -> array:
    """Stream of n symbols drawn uniformly from [0, q)."""
    return array("H", [rng.randrange(q) for _ in range(n)])


def nonzero_symbol(rng: random.Random, q: int) -> int:
    """One symbol drawn uniformly from [1, q)."""
    return rng.randrange(1, q)
