"""Exact arithmetic and linear algebra over GF(2^m), m in 1..16.

Field elements are plain ints in [0, 2^m).  Scalar multiplication goes
through log/antilog tables built once per (m, poly) pair; bulk stream
operations (XOR, multiply-accumulate) dispatch to the compiled kernel
extension when it is importable and to the pure-Python twin otherwise.

`FieldSpec` instances are immutable after construction and safe for
concurrent reads.  All matrix operations are pure functions on value
types.
"""

import os
from array import array

from .errors import Singular, ZeroInverse

if os.environ.get("CACHECODER_PURE_PYTHON"):
    from . import _gfcore_py as _kern
else:
    try:
        from . import _gfcore as _kern  # type: ignore[attr-defined]
    except ImportError:
        from . import _gfcore_py as _kern

BACKEND = _kern.BACKEND

# Standard irreducible polynomials, one per degree.  m=8 is the familiar
# x^8+x^4+x^3+x+1; every entry is re-checked at FieldSpec construction.
DEFAULT_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11B,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def _clmul_mod(a: int, b: int, poly: int, m: int) -> int:
    """Carry-less product of a and b reduced mod poly (shift-and-reduce)."""
    p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        if (a >> m) & 1:
            a ^= poly
        b >>= 1
    return p


def _poly_degree(poly: int) -> int:
    return poly.bit_length() - 1


def _poly_mod(a: int, b: int) -> int:
    """Remainder of the carry-less division a / b."""
    db = _poly_degree(b)
    while _poly_degree(a) >= db and a:
        a ^= b << (_poly_degree(a) - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    m = _poly_degree(poly)
    if m < 1:
        return False
    for d in range(1, m // 2 + 1):
        for low in range(1 << d):
            cand = (1 << d) | low
            if _poly_mod(poly, cand) == 0:
                return False
    return True


class FieldSpec:
    """GF(2^m) with a fixed irreducible reduction polynomial.

    Builds log/antilog tables from the smallest generator of the
    multiplicative group, so any irreducible polynomial works (the
    default degree-8 polynomial is irreducible but x alone does not
    generate its group).
    """

    __slots__ = ("m", "poly", "q", "exp", "log")

    def __init__(self, m: int = 8, reduction_poly: int | None = None):
        if not 1 <= m <= 16:
            raise ValueError(f"field bit width m must be in 1..16, got {m}")
        poly = DEFAULT_POLYS[m] if reduction_poly is None else reduction_poly
        if _poly_degree(poly) != m:
            raise ValueError(f"reduction polynomial {poly:#x} does not have degree {m}")
        if not is_irreducible(poly):
            raise ValueError(f"reduction polynomial {poly:#x} is reducible")
        self.m = m
        self.poly = poly
        self.q = 1 << m
        self.exp, self.log = self._build_tables()

    def _multiplicative_order(self, g: int) -> int:
        x, order = g, 1
        while x != 1:
            x = _clmul_mod(x, g, self.poly, self.m)
            order += 1
            if order > self.q:
                raise AssertionError("order search overran the group")
        return order

    def _build_tables(self):
        q = self.q
        gen = 1
        if q > 2:
            gen = next(
                g for g in range(2, q) if self._multiplicative_order(g) == q - 1
            )
        exp = array("H", [0]) * (2 * (q - 1) if q > 2 else 2)
        log = array("i", [0]) * q
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = _clmul_mod(x, gen, self.poly, self.m)
        for i in range(q - 1, len(exp)):
            exp[i] = exp[i - (q - 1)]
        return exp, log

    # -- scalar ops --------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("zero has no multiplicative inverse")
        return self.exp[(self.q - 1) - self.log[a]]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # -- stream ops (hot path, kernel-backed) ------------------------

    @staticmethod
    def zeros(n: int) -> array:
        return array("H", bytes(2 * n))

    @staticmethod
    def xor_into(dst, src) -> None:
        _kern.xor_into(dst, src)

    def axpy_into(self, dst, c: int, src) -> None:
        """dst ^= c * src elementwise."""
        _kern.axpy_into(dst, c, src, self.exp, self.log)

    def scale_into(self, dst, c: int) -> None:
        _kern.scale_into(dst, c, self.exp, self.log)

    def scaled(self, c: int, src) -> array:
        out = array("H", src)
        _kern.scale_into(out, c, self.exp, self.log)
        return out

    def __repr__(self):
        return f"FieldSpec(m={self.m}, poly={self.poly:#x})"

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and self.m == other.m
            and self.poly == other.poly
        )

    def __hash__(self):
        return hash((self.m, self.poly))


_SPEC_CACHE: dict[tuple[int, int | None], FieldSpec] = {}


def field_spec(m: int = 8, reduction_poly: int | None = None) -> FieldSpec:
    """Cached FieldSpec constructor (tables are built once per field)."""
    key = (m, reduction_poly)
    if key not in _SPEC_CACHE:
        _SPEC_CACHE[key] = FieldSpec(m, reduction_poly)
    return _SPEC_CACHE[key]


class FieldMatrix:
    """Small dense matrix over a FieldSpec (row-major list of ints).

    Used for channel matrices, precoders and decode coefficient
    systems; these stay tiny (at most K x L), so clarity beats speed
    here.  Elimination always picks the first nonzero pivot in column
    order, which keeps every run reproducible.
    """

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: FieldSpec, rows: int, cols: int, data=None):
        self.field = field
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [0] * (rows * cols)
        else:
            self.data = list(data)
            if len(self.data) != rows * cols:
                raise ValueError("data length does not match shape")
            for v in self.data:
                if not 0 <= v < field.q:
                    raise ValueError(f"element {v} out of range for {field!r}")

    @classmethod
    def from_rows(cls, field, row_lists):
        rows = len(row_lists)
        cols = len(row_lists[0]) if rows else 0
        flat = [v for row in row_lists for v in row]
        return cls(field, rows, cols, flat)

    @classmethod
    def identity(cls, field, n):
        m = cls(field, n, n)
        for i in range(n):
            m.data[i * n + i] = 1
        return m

    def at(self, r: int, c: int) -> int:
        return self.data[r * self.cols + c]

    def set(self, r: int, c: int, v: int) -> None:
        self.data[r * self.cols + c] = v

    def row(self, r: int) -> list:
        return self.data[r * self.cols : (r + 1) * self.cols]

    def col(self, c: int) -> list:
        return self.data[c :: self.cols]

    def copy(self):
        return FieldMatrix(self.field, self.rows, self.cols, self.data)

    def transpose(self):
        out = FieldMatrix(self.field, self.cols, self.rows)
        for r in range(self.rows):
            for c in range(self.cols):
                out.set(c, r, self.at(r, c))
        return out

    def mul(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        f = self.field
        out = FieldMatrix(f, self.rows, other.cols)
        for r in range(self.rows):
            for k in range(self.cols):
                a = self.at(r, k)
                if a == 0:
                    continue
                for c in range(other.cols):
                    b = other.at(k, c)
                    if b:
                        out.data[r * other.cols + c] ^= f.mul(a, b)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, FieldMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
            and self.field == other.field
        )

    def __repr__(self):
        body = "; ".join(" ".join(str(v) for v in self.row(r)) for r in range(self.rows))
        return f"FieldMatrix({self.rows}x{self.cols}: {body})"

    def _rref(self):
        """Reduced row echelon form; returns (matrix copy, pivot column list)."""
        f = self.field
        m = self.copy()
        pivots = []
        pr = 0
        for c in range(m.cols):
            pivot = next(
                (r for r in range(pr, m.rows) if m.at(r, c) != 0), None
            )
            if pivot is None:
                continue
            if pivot != pr:
                for j in range(m.cols):
                    a, b = m.at(pr, j), m.at(pivot, j)
                    m.set(pr, j, b)
                    m.set(pivot, j, a)
            inv = f.inv(m.at(pr, c))
            for j in range(m.cols):
                m.set(pr, j, f.mul(inv, m.at(pr, j)))
            for r in range(m.rows):
                if r != pr and m.at(r, c) != 0:
                    coef = m.at(r, c)
                    for j in range(m.cols):
                        m.set(r, j, m.at(r, j) ^ f.mul(coef, m.at(pr, j)))
            pivots.append(c)
            pr += 1
            if pr == m.rows:
                break
        return m, pivots

    def rank(self) -> int:
        return len(self._rref()[1])

    def null_space(self) -> "FieldMatrix":
        """Basis of {x : A x = 0} as columns; zero-width when A has full column rank."""
        red, pivots = self._rref()
        free = [c for c in range(self.cols) if c not in pivots]
        out = FieldMatrix(self.field, self.cols, len(free))
        for idx, fc in enumerate(free):
            out.set(fc, idx, 1)
            for i, pc in enumerate(pivots):
                # char 2: moving the free term across the equation is a plain copy
                out.set(pc, idx, red.at(i, fc))
        return out

    def solve(self, b: "FieldMatrix") -> "FieldMatrix":
        """Exact solution of A x = b for square A; raises Singular."""
        if self.rows != self.cols:
            raise ValueError("solve needs a square matrix")
        if b.rows != self.rows:
            raise ValueError("rhs height mismatch")
        f = self.field
        n = self.rows
        aug = FieldMatrix(f, n, n + b.cols)
        for r in range(n):
            for c in range(n):
                aug.set(r, c, self.at(r, c))
            for c in range(b.cols):
                aug.set(r, n + c, b.at(r, c))
        red, pivots = aug._rref()
        if len(pivots) < n or pivots[:n] != list(range(n)):
            raise Singular(f"matrix rank {self.rank()} < {n}")
        out = FieldMatrix(f, n, b.cols)
        for r in range(n):
            for c in range(b.cols):
                out.set(r, c, red.at(r, n + c))
        return out

    def inv_matrix(self) -> "FieldMatrix":
        return self.solve(FieldMatrix.identity(self.field, self.rows))


def dot(field: FieldSpec, a, b) -> int:
    """Scalar product of two equal-length coefficient vectors."""
    acc = 0
    for x, y in zip(a, b):
        if x and y:
            acc ^= field.mul(x, y)
    return acc


def solve_streams(field: FieldSpec, coef_rows, rhs):
    """Solve a scalar system whose right-hand sides are symbol streams.

    coef_rows is an n x n list-of-lists of field scalars; rhs is a list
    of n equal-length streams.  Returns the n solution streams (new
    arrays).  Raises Singular when the coefficient matrix is rank
    deficient.  Row operations on the streams go through the bulk
    kernels, so wide systems stay cheap.
    """
    n = len(coef_rows)
    a = [list(row) for row in coef_rows]
    b = [array("H", s) for s in rhs]
    if len(b) != n:
        raise ValueError("rhs count mismatch")
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise Singular("decode coefficient system is singular")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = field.inv(a[col][col])
        if inv != 1:
            a[col] = [field.mul(inv, v) for v in a[col]]
            field.scale_into(b[col], inv)
        for r in range(n):
            if r != col and a[r][col] != 0:
                c = a[r][col]
                a[r] = [x ^ field.mul(c, y) for x, y in zip(a[r], a[col])]
                field.axpy_into(b[r], c, b[col])
    return b
