"""Boolean functions, correlation immunity and the Nordstrom-Robinson array."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .core import BinaryArray, ParameterError, is_simple, verify_strength


class BooleanFunction:
    """Truth table of f: F_2^n -> F_2, indexed by input word."""

    __slots__ = ("n", "table")

    def __init__(self, n: int, table):
        table = np.asarray(table, dtype=bool).copy()
        if n < 1 or table.shape != (1 << n,):
            raise ParameterError(f"truth table must have 2^{n} entries")
        table.flags.writeable = False
        self.n = n
        self.table = table

    @classmethod
    def from_support(cls, a: BinaryArray) -> "BooleanFunction":
        if not is_simple(a):
            raise ParameterError("a support must not repeat rows")
        table = np.zeros(1 << a.n, dtype=bool)
        table[a.rows] = True
        return cls(a.n, table)

    @classmethod
    def parity(cls, n: int) -> "BooleanFunction":
        w = np.arange(1 << n)
        return cls(n, np.array([bin(x).count("1") & 1 for x in w], dtype=bool))

    @classmethod
    def constant(cls, n: int, value: int) -> "BooleanFunction":
        return cls(n, np.full(1 << n, bool(value)))

    def support(self) -> BinaryArray:
        sup = np.flatnonzero(self.table)
        if sup.size == 0:
            raise ParameterError("the zero function has an empty support")
        return BinaryArray(self.n, sup)

    def to_hex(self) -> str:
        """Hex string, most significant digit holding the highest input words."""
        value = 0
        for w in np.flatnonzero(self.table)[::-1]:
            value |= 1 << int(w)
        digits = max(1, -(-(1 << self.n) // 4))
        return format(value, f"0{digits}x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> "BooleanFunction":
        text = text.strip().lower().removeprefix("0x")
        digits = max(1, -(-(1 << n) // 4))
        if len(text) != digits:
            raise ParameterError(f"expected {digits} hex digits for n = {n}, got {len(text)}")
        try:
            value = int(text, 16)
        except ValueError:
            raise ParameterError("not a hex string") from None
        if value >> (1 << n):
            raise ParameterError("hex string has bits beyond 2^n")
        bits = [(value >> w) & 1 for w in range(1 << n)]
        return cls(n, bits)

    def __eq__(self, other):
        return isinstance(other, BooleanFunction) and self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def __repr__(self):
        return f"BooleanFunction(n={self.n}, weight={weight(self)})"


def weight(f: BooleanFunction) -> int:
    return int(np.count_nonzero(f.table))


def ci_order(f: BooleanFunction) -> int:
    """Largest t < n such that the support of ``f`` is an OA of strength t.

    Strength t implies every smaller strength, so the scan stops at the
    first failure. The zero function has no order.
    """
    if weight(f) == 0:
        raise ParameterError("correlation-immunity order is undefined for the zero function")
    sup = f.support()
    t = 0
    while t + 1 < f.n and verify_strength(sup, t + 1).ok:
        t += 1
    return t


def walsh_spectrum(f: BooleanFunction) -> np.ndarray:
    """sum_x (-1)^(f(x) + a.x) for every a, via the fast transform."""
    v = np.where(f.table, -1, 1).astype(np.int64)
    h = 1
    while h < v.size:
        v = v.reshape(-1, 2, h)
        v = np.stack([v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]], axis=1).reshape(-1)
        h *= 2
    return v


# ---------------------------------------------------------------- Nordstrom-Robinson

# Generator matrix of the octacode, a self-dual Z4-linear code of length 8.
OCTACODE_GENERATOR = np.array([
    [1, 0, 0, 0, 3, 1, 2, 1],
    [0, 1, 0, 0, 1, 2, 3, 1],
    [0, 0, 1, 0, 3, 3, 3, 2],
    [0, 0, 0, 1, 2, 3, 1, 1],
], dtype=np.int64)

# Gray map Z4 -> F_2^2: 0 -> 00, 1 -> 01, 2 -> 11, 3 -> 10 (first bit, second bit)
_GRAY = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.int64)


class ConstructionError(RuntimeError):
    pass


def octacode() -> np.ndarray:
    msgs = np.array(list(itertools.product(range(4), repeat=4)), dtype=np.int64)
    return (msgs @ OCTACODE_GENERATOR) % 4


@lru_cache(maxsize=1)
def _nr() -> BinaryArray:
    words = octacode()
    bits = _GRAY[words].reshape(words.shape[0], 16)
    a = BinaryArray.from_matrix(bits)
    rep = verify_strength(a, 5)
    if not (rep.ok and rep.index == 8 and a.N == 256 and is_simple(a)):
        raise ConstructionError(f"Gray image of the octacode failed its self-check: {rep}")
    return a


def nordstrom_robinson() -> BinaryArray:
    """The 256 x 16 Nordstrom-Robinson array, a simple OA(256, 16, 2, 5).

    Built as the Gray image of the octacode; the result is checked for
    strength 5 and simplicity before it is returned.
    """
    return _nr()
