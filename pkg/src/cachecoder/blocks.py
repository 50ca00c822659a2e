"""Shared delivery-phase record types.

A TransmitLog is the ordered sequence of coded blocks a delivery
produced; each block carries the transmitted rows plus the public
metadata (precoders, fragment indices, coefficient tags) decoders and
the security auditor need.  Key streams themselves never appear here.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


@dataclass
class Block:
    subset: tuple[int, ...]
    omega: int
    key_ids: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0


@dataclass
class TransmitLog:
    f: int
    blocks: list = field(default_factory=list)

    @property
    def total_columns(self) -> int:
        return sum(b.width for b in self.blocks)

    @property
    def delay(self) -> Fraction:
        """Measured coding delay: transmitted columns normalized by f."""
        return Fraction(self.total_columns, self.f)


class UserCache:
    """Cache of one user: data fragments plus key streams."""

    def __init__(self, user: int):
        self.user = user
        self.data: dict = {}
        self.keys: dict = {}

    def data_symbols(self) -> int:
        return sum(len(v) for v in self.data.values())

    def key_symbols(self) -> int:
        return sum(len(v) for v in self.keys.values())

    def total_symbols(self) -> int:
        return self.data_symbols() + self.key_symbols()


@dataclass
class RunReport:
    scheme: str
    params: Any
    measured_delay: Fraction
    measured_m_d: Fraction
    measured_m_k: Fraction
    formula_delay: Fraction
    formula_m_d: Fraction
    formula_m_k: Fraction
    decode_ok: dict
    delivery_attempts: int = 1

    @property
    def delay_matches(self) -> bool:
        return self.measured_delay == self.formula_delay

    @property
    def storage_matches(self) -> bool:
        return (
            self.measured_m_d == self.formula_m_d
            and self.measured_m_k == self.formula_m_k
        )

    @property
    def all_decoded(self) -> bool:
        return all(self.decode_ok.values())
