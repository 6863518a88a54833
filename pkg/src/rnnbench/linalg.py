"""Dense float64 containers, activation kernels, and a portable PRNG.

Everything else in the package is built on this module; there is no
dependency on numpy or any other numeric library.  Matrices are dense,
row-major, 64-bit.  Containers are treated as immutable after
construction except where an operation is documented to mutate
(optimizer updates); they are safe to share read-only across threads.
"""

from __future__ import annotations

import math
from array import array

_U64_MASK = (1 << 64) - 1
_INV_2_53 = 2.0**-53


class Rng:
    """SplitMix64 generator: same seed, same sequence, on every platform.

    State is a single 64-bit word; the output function is the reference
    SplitMix64 mix (Steele, Lea & Flood 2014).
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _U64_MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _U64_MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64_MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64_MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform draw in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def randrange(self, n: int) -> int:
        # Modulo bias is ~n/2^64, irrelevant for the sizes used here.
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def _check_finite(data: array, what: str) -> None:
    for x in data:
        if not math.isfinite(x):
            raise ValueError(f"{what} contains a non-finite entry ({x!r})")


class Vector:
    """Dense float64 vector."""

    __slots__ = ("data",)

    def __init__(self, data, _checked: bool = False):
        self.data = data if (_checked and isinstance(data, array)) else array("d", data)
        if not _checked:
            _check_finite(self.data, "Vector")

    @classmethod
    def zeros(cls, n: int) -> "Vector":
        return cls(array("d", bytes(8 * n)), _checked=True)

    def __len__(self) -> int:
        return len(self.data)

    def __getitem__(self, i: int) -> float:
        return self.data[i]

    def __iter__(self):
        return iter(self.data)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vector) and self.data == other.data

    def __repr__(self) -> str:
        return f"Vector({list(self.data)!r})"

    def copy(self) -> "Vector":
        return Vector(array("d", self.data), _checked=True)

    def tolist(self) -> list:
        return list(self.data)


class Matrix:
    """Dense float64 matrix, row-major: entry (i, j) is data[i*cols + j]."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data, _checked: bool = False):
        self.rows = rows
        self.cols = cols
        self.data = data if (_checked and isinstance(data, array)) else array("d", data)
        if len(self.data) != rows * cols:
            raise ValueError(
                f"Matrix data length {len(self.data)} != rows*cols = {rows}*{cols}"
            )
        if not _checked:
            _check_finite(self.data, "Matrix")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, array("d", bytes(8 * rows * cols)), _checked=True)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        m = cls.zeros(n, n)
        for i in range(n):
            m.data[i * n + i] = 1.0
        return m

    def get(self, i: int, j: int) -> float:
        return self.data[i * self.cols + j]

    def __getitem__(self, ij) -> float:
        i, j = ij
        return self.data[i * self.cols + j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"

    def copy(self) -> "Matrix":
        return Matrix(self.rows, self.cols, array("d", self.data), _checked=True)


def matvec(m: Matrix, v: Vector) -> Vector:
    """Standard matrix-vector product."""
    if m.cols != len(v):
        raise ValueError(
            f"matvec shape mismatch: matrix is {m.rows}x{m.cols}, "
            f"vector has length {len(v)}"
        )
    md = m.data
    vd = v.data
    cols = m.cols
    out = array("d", bytes(8 * m.rows))
    for i in range(m.rows):
        base = i * cols
        s = 0.0
        for k in range(cols):
            s += md[base + k] * vd[k]
        out[i] = s
    return Vector(out, _checked=True)


def sigmoid_scalar(x: float) -> float:
    """Numerically stable logistic function; never overflows for finite x."""
    if x >= 0.0:
        t = math.exp(-x)
        return 1.0 / (1.0 + t)
    t = math.exp(x)
    return t / (1.0 + t)


def sigmoid(v: Vector) -> Vector:
    """Elementwise logistic function; outputs strictly inside (0, 1)."""
    out = array("d", v.data)
    for i, x in enumerate(out):
        out[i] = sigmoid_scalar(x)
    return Vector(out, _checked=True)


def tanh_v(v: Vector) -> Vector:
    """Elementwise hyperbolic tangent; outputs in (-1, 1)."""
    out = array("d", v.data)
    for i, x in enumerate(out):
        out[i] = math.tanh(x)
    return Vector(out, _checked=True)


def vadd(a: Vector, b: Vector) -> Vector:
    if len(a) != len(b):
        raise ValueError(f"vadd length mismatch: {len(a)} vs {len(b)}")
    out = array("d", a.data)
    bd = b.data
    for i in range(len(out)):
        out[i] += bd[i]
    return Vector(out, _checked=True)


def vmul(a: Vector, b: Vector) -> Vector:
    """Elementwise (Hadamard) product."""
    if len(a) != len(b):
        raise ValueError(f"vmul length mismatch: {len(a)} vs {len(b)}")
    out = array("d", a.data)
    bd = b.data
    for i in range(len(out)):
        out[i] *= bd[i]
    return Vector(out, _checked=True)


def concat(a: Vector, b: Vector) -> Vector:
    out = array("d", a.data)
    out.extend(b.data)
    return Vector(out, _checked=True)


def init_uniform(rng: Rng, rows: int, cols: int, scale: float) -> Matrix:
    """Matrix with entries drawn uniformly from [-scale, +scale).

    Entries are drawn row-major, so a given seed yields a bit-identical
    matrix everywhere.
    """
    if scale <= 0.0:
        raise ValueError(f"init_uniform scale must be > 0, got {scale}")
    data = array("d", bytes(8 * rows * cols))
    for i in range(rows * cols):
        data[i] = rng.uniform(-scale, scale)
    return Matrix(rows, cols, data, _checked=True)
