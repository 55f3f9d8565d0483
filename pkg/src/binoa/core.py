"""Binary orthogonal arrays: containers, strength checks, derived arrays, canonical forms.

Rows are stored as integer words. Bit ``j`` of a word is the entry in
column ``j`` (column 0 is the least significant bit).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class ParameterError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class CapacityError(RuntimeError):
    """Raised when an input exceeds what an algorithm is built to handle."""


class FormatError(ValueError):
    """Malformed OAT1/OAM1 text. ``line`` is 1-based, or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


MAX_CANONICAL_FACTORS = 12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class OAParams:
    runs: int
    factors: int
    strength: int
    levels: int = 2

    def __post_init__(self):
        if self.levels != 2:
            raise ParameterError("only binary arrays are supported")
        if self.runs < 1 or self.factors < 1 or self.strength < 1:
            raise ParameterError("runs, factors and strength must be positive")
        if self.strength >= self.factors:
            raise ParameterError("strength must be smaller than the number of factors")
        if self.runs % (1 << self.strength):
            raise ParameterError(f"{self.runs} runs is not a multiple of 2^{self.strength}")

    @classmethod
    def from_index(cls, factors: int, strength: int, index: int) -> "OAParams":
        if index < 1:
            raise ParameterError("index must be at least 1")
        return cls(index << strength, factors, strength)

    @property
    def index(self) -> int:
        return self.runs >> self.strength

    def __str__(self):
        return f"OA({self.runs},{self.factors},2,{self.strength})"


class BinaryArray:
    """An N x n binary array with rows held as bit words."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows: Iterable[int]):
        rows = np.array(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype=np.int64)
        if n < 1:
            raise ParameterError("an array needs at least one column")
        if rows.ndim != 1 or rows.size == 0:
            raise ParameterError("an array needs at least one row")
        if rows.min() < 0 or rows.max() >> n:
            raise ParameterError(f"row word out of range for {n} columns")
        self.n = n
        self.rows = _frozen(rows)

    @classmethod
    def from_matrix(cls, matrix) -> "BinaryArray":
        m = np.asarray(matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[1] == 0:
            raise ParameterError("expected a 2-d 0/1 matrix")
        if ((m != 0) & (m != 1)).any():
            raise ParameterError("entries must be 0 or 1")
        weights = np.int64(1) << np.arange(m.shape[1], dtype=np.int64)
        return cls(m.shape[1], m @ weights)

    @classmethod
    def full_factorial(cls, n: int) -> "BinaryArray":
        return cls(n, np.arange(1 << n))

    @property
    def N(self) -> int:
        return int(self.rows.size)

    def matrix(self) -> np.ndarray:
        return ((self.rows[:, None] >> np.arange(self.n)) & 1).astype(np.uint8)

    def multiplicities(self) -> "MultiplicityVector":
        return MultiplicityVector(self.n, np.bincount(self.rows, minlength=1 << self.n))

    def sorted(self) -> "BinaryArray":
        return BinaryArray(self.n, np.sort(self.rows))

    def __len__(self):
        return self.N

    def __eq__(self, other):
        return (isinstance(other, BinaryArray) and self.n == other.n
                and np.array_equal(self.rows, other.rows))

    def __hash__(self):
        return hash((self.n, self.rows.tobytes()))

    def __repr__(self):
        return f"BinaryArray(n={self.n}, N={self.N})"


class MultiplicityVector:
    """Run counts indexed by row word; the row-order-free view of an array."""

    __slots__ = ("n", "counts")

    def __init__(self, n: int, counts):
        counts = np.array(counts, dtype=np.int64)
        if counts.shape != (1 << n,):
            raise ParameterError(f"expected {1 << n} counts for {n} columns")
        if counts.min() < 0:
            raise ParameterError("counts must be nonnegative")
        self.n = n
        self.counts = _frozen(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def array(self) -> BinaryArray:
        return BinaryArray(self.n, np.repeat(np.arange(1 << self.n), self.counts))

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.counts)

    def __eq__(self, other):
        return (isinstance(other, MultiplicityVector) and self.n == other.n
                and np.array_equal(self.counts, other.counts))

    def __lt__(self, other):
        return tuple(self.counts) < tuple(other.counts)

    def __hash__(self):
        return hash((self.n, self.counts.tobytes()))

    def __repr__(self):
        return f"MultiplicityVector(n={self.n}, N={self.total})"


def _as_counts(a) -> MultiplicityVector:
    if isinstance(a, MultiplicityVector):
        return a
    if isinstance(a, BinaryArray):
        return a.multiplicities()
    raise TypeError(f"expected BinaryArray or MultiplicityVector, got {type(a).__name__}")


@dataclass(frozen=True, eq=False)
class IsoOp:
    """Column permutation followed by per-column level swaps.

    ``perm[j]`` is the output position of input column ``j``; ``mask`` is
    XORed onto the permuted word.
    """

    perm: tuple[int, ...]
    mask: int = 0

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ParameterError("perm must be a permutation of 0..n-1")
        if self.mask < 0 or self.mask >> len(self.perm):
            raise ParameterError("mask has bits outside the column range")

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "IsoOp":
        return cls(tuple(range(n)), 0)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "IsoOp":
        return cls(tuple(rng.permutation(n)), int(rng.integers(0, 1 << n)))

    def permute_word(self, w: int) -> int:
        out = 0
        for j, p in enumerate(self.perm):
            out |= ((w >> j) & 1) << p
        return out

    def __call__(self, w: int) -> int:
        return self.permute_word(w) ^ self.mask

    def table(self) -> np.ndarray:
        """Image of every word 0..2^n-1."""
        words = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros_like(words)
        for j, p in enumerate(self.perm):
            out |= ((words >> j) & 1) << p
        return out ^ self.mask

    def compose(self, other: "IsoOp") -> "IsoOp":
        """``self ∘ other``: apply ``other`` first."""
        if other.n != self.n:
            raise ParameterError("IsoOps act on different column counts")
        perm = tuple(self.perm[other.perm[j]] for j in range(self.n))
        return IsoOp(perm, self.permute_word(other.mask) ^ self.mask)

    def inverse(self) -> "IsoOp":
        inv = [0] * self.n
        for j, p in enumerate(self.perm):
            inv[p] = j
        g = IsoOp(tuple(inv), 0)
        return IsoOp(g.perm, g.permute_word(self.mask))

    def __eq__(self, other):
        return isinstance(other, IsoOp) and self.perm == other.perm and self.mask == other.mask

    def __hash__(self):
        return hash((self.perm, self.mask))

    def apply(self, a):
        """Image of a BinaryArray or MultiplicityVector."""
        if isinstance(a, BinaryArray):
            self._check(a.n)
            return BinaryArray(a.n, self.table()[a.rows])
        if isinstance(a, MultiplicityVector):
            self._check(a.n)
            out = np.empty_like(a.counts)
            out[self.table()] = a.counts
            return MultiplicityVector(a.n, out)
        raise TypeError(f"cannot apply IsoOp to {type(a).__name__}")

    def _check(self, n):
        if n != self.n:
            raise ParameterError(f"IsoOp on {self.n} columns applied to {n} columns")


@dataclass(frozen=True)
class StrengthReport:
    ok: bool
    index: int | None = None
    violation: tuple[tuple[int, ...], int, int] | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _project(rows: np.ndarray, cols: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(rows)
    for j, c in enumerate(cols):
        out |= ((rows >> c) & 1) << j
    return out


def verify_strength(a: BinaryArray, t: int) -> StrengthReport:
    """Check that every t-column projection of ``a`` is uniform.

    Column subsets are scanned in lexicographic order and tuples in
    ascending word order (bit ``j`` of a tuple is the entry in the j-th
    chosen column), so a failure returns the first violating
    ``(subset, tuple, observed count)``.
    """
    n, N = a.n, a.N
    if t < 1 or t >= n:
        raise ParameterError(f"strength {t} must satisfy 1 <= t < n = {n}")
    size = 1 << t
    if N % size:
        first = tuple(range(t))
        observed = int(np.count_nonzero(_project(a.rows, first) == 0))
        return StrengthReport(False, None, (first, 0, observed),
                              f"{N} runs is not divisible by 2^{t}")
    lam = N // size
    for cols in itertools.combinations(range(n), t):
        counts = np.bincount(_project(a.rows, cols), minlength=size)
        bad = np.flatnonzero(counts != lam)
        if bad.size:
            u = int(bad[0])
            return StrengthReport(False, None, (cols, u, int(counts[u])),
                                  f"tuple {u} on columns {cols} appears {counts[u]} times, expected {lam}")
    return StrengthReport(True, lam)


def strength(a: BinaryArray) -> int:
    """Largest t < n for which ``a`` has strength t (0 if none)."""
    t = 0
    while t + 1 < a.n and verify_strength(a, t + 1).ok:
        t += 1
    return t


def is_simple(a: BinaryArray) -> bool:
    return np.unique(a.rows).size == a.N


def delete_columns(a: BinaryArray, cols: Iterable[int]) -> BinaryArray:
    cols = set(int(c) for c in cols)
    if any(c < 0 or c >= a.n for c in cols):
        raise ParameterError("column index out of range")
    keep = [j for j in range(a.n) if j not in cols]
    if not keep:
        raise ParameterError("cannot delete every column")
    return BinaryArray(len(keep), _project(a.rows, keep))


def derive(a: BinaryArray, col: int, value: int, t: int | None = None) -> BinaryArray:
    """Rows of ``a`` with ``value`` in column ``col``, that column removed.

    For an OA(N, n, 2, t) with t >= 2 this is an OA(N/2, n-1, 2, t-1) of
    the same index. ``t`` is the strength the caller vouches for; when
    omitted the actual strength of ``a`` is used.
    """
    if not 0 <= col < a.n:
        raise ParameterError("column index out of range")
    if value not in (0, 1):
        raise ParameterError("value must be 0 or 1")
    if t is None:
        t = strength(a)
    if t < 2:
        raise ParameterError(f"deriving needs strength >= 2, input has strength {t}")
    if a.n < 2:
        raise ParameterError("deriving needs at least two columns")
    sel = a.rows[((a.rows >> col) & 1) == value]
    if sel.size == 0:
        raise ParameterError(f"no row has value {value} in column {col}")
    return delete_columns(BinaryArray(a.n, sel), [col])


# ---------------------------------------------------------------- canonical form


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Lexicographically least multiplicity vector in an isomorphism orbit."""

    counts: MultiplicityVector

    @property
    def n(self) -> int:
        return self.counts.n

    @property
    def N(self) -> int:
        return self.counts.total

    def array(self) -> BinaryArray:
        return self.counts.array()

    def key(self) -> bytes:
        return self.counts.counts.astype(np.uint16).tobytes()

    def __eq__(self, other):
        return isinstance(other, CanonicalForm) and self.counts == other.counts

    def __lt__(self, other):
        return self.counts < other.counts

    def __hash__(self):
        return hash(self.counts)

    def __repr__(self):
        return f"CanonicalForm(n={self.n}, N={self.N})"


# Cap on int16 entries held by the BFS at one level.
_STATE_BUDGET = 40_000_000


def _lexmin_rows(blocks: np.ndarray) -> np.ndarray:
    keep = np.ones(blocks.shape[0], dtype=bool)
    for j in range(blocks.shape[1]):
        col = blocks[:, j]
        m = col[keep].min()
        keep &= col == m
    return np.flatnonzero(keep)


def _canonical_arrangements(counts: np.ndarray, n: int) -> np.ndarray:
    """All run arrangements realising the lex-min image.

    Row ``s`` of the result lists, for each canonical position ``w``, the
    original run placed there. A partial arrangement is fixed by the
    run at position 0 (which absorbs the level swaps) and the ordered
    list of columns moved to positions 0..k-1; each level keeps only the
    partial arrangements whose block of 2^(k-1) new entries is smallest.
    """
    if counts.max() > np.iinfo(np.int16).max:
        raise CapacityError("run counts too large for canonical form search")
    c = counts.astype(np.int16)
    idx = np.flatnonzero(c == c.min()).astype(np.int16)[:, None]
    used = np.zeros(idx.shape[0], dtype=np.int64)
    for k in range(n):
        S = idx.shape[0]
        width = idx.shape[1]
        if S * (n - k) * width > _STATE_BUDGET:
            raise CapacityError(f"canonical form search exceeded its state budget at level {k}")
        cols = np.arange(n, dtype=np.int64)
        free = ((used[:, None] >> cols) & 1) == 0
        s_idx, col_idx = np.nonzero(free)
        new = idx[s_idx] ^ (np.int16(1) << col_idx.astype(np.int16))[:, None]
        blocks = c[new]
        best = _lexmin_rows(blocks)
        s_keep = s_idx[best]
        idx = np.concatenate([idx[s_keep], new[best]], axis=1)
        used = used[s_keep] | (np.int64(1) << col_idx[best])
    return idx


def _check_canonical_input(m: MultiplicityVector):
    if m.n > MAX_CANONICAL_FACTORS:
        raise CapacityError(f"canonical forms are supported for n <= {MAX_CANONICAL_FACTORS}")
    if m.total == 0:
        raise ParameterError("empty multiset")


def canonical_form(a) -> CanonicalForm:
    """Lex-min multiplicity vector over all column permutations and level swaps."""
    m = _as_counts(a)
    _check_canonical_input(m)
    arr = _canonical_arrangements(m.counts, m.n)
    return CanonicalForm(MultiplicityVector(m.n, m.counts[arr[0]]))


def _arrangement_to_op(arrangement: np.ndarray, n: int) -> IsoOp:
    # arrangement[w] = original run at canonical position w; the op maps run -> w
    mu = int(arrangement[0])
    perm = [0] * n
    for k in range(n):
        j = (int(arrangement[1 << k]) ^ mu).bit_length() - 1
        perm[j] = k
    g = IsoOp(tuple(perm), 0)
    return IsoOp(g.perm, g.permute_word(mu))


def canonical_op(a) -> IsoOp:
    """An IsoOp taking ``a`` to its canonical form."""
    m = _as_counts(a)
    _check_canonical_input(m)
    return _arrangement_to_op(_canonical_arrangements(m.counts, m.n)[0], m.n)


def automorphism_tables(a) -> np.ndarray:
    """Run permutations (one per row) that fix the multiset ``a``.

    Row ``i`` maps run ``r`` to ``table[i, r]``; the identity is included.
    """
    m = _as_counts(a)
    _check_canonical_input(m)
    arr = _canonical_arrangements(m.counts, m.n).astype(np.int64)
    inv0 = np.empty(arr.shape[1], dtype=np.int64)
    inv0[arr[0]] = np.arange(arr.shape[1])
    # sigma = arr[s] o arr[0]^-1 sends arr[0][w] to arr[s][w]
    return arr[:, inv0]


def automorphisms(a) -> list[IsoOp]:
    m = _as_counts(a)
    _check_canonical_input(m)
    arr = _canonical_arrangements(m.counts, m.n)
    g0_inv = _arrangement_to_op(arr[0], m.n).inverse()
    return [g0_inv.compose(_arrangement_to_op(row, m.n)) for row in arr]


def is_isomorphic(a, b) -> bool:
    ma, mb = _as_counts(a), _as_counts(b)
    return ma.n == mb.n and ma.total == mb.total and canonical_form(ma) == canonical_form(mb)


# ---------------------------------------------------------------- text formats


def format_oat(a: BinaryArray, t: int = 0) -> str:
    """OAT1 text: header ``N n 2 t`` then one row of bits per line."""
    lines = [f"{a.N} {a.n} 2 {t}"]
    m = a.matrix()
    lines.extend(" ".join(map(str, row)) for row in m)
    return "\n".join(lines) + "\n"


def parse_oat(text: str) -> tuple[BinaryArray, int]:
    """Parse OAT1 text; returns the array and its claimed strength (0 = none)."""
    lines = [ln for ln in text.splitlines()]
    if not lines or not lines[0].strip():
        raise FormatError("missing header", 1)
    head = lines[0].split()
    if len(head) != 4:
        raise FormatError("header must be 'N n s t'", 1)
    try:
        N, n, s, t = map(int, head)
    except ValueError:
        raise FormatError("header fields must be integers", 1) from None
    if s != 2:
        raise FormatError("only s = 2 is supported", 1)
    if N < 1 or n < 1 or t < 0 or (t and t >= n):
        raise FormatError("invalid header values", 1)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != N:
        raise FormatError(f"expected {N} rows, found {len(body)}", len(body) + 2)
    weights = 1 << np.arange(n)
    rows = np.empty(N, dtype=np.int64)
    for i, ln in enumerate(body):
        bits = ln.split()
        if len(bits) != n or any(b not in ("0", "1") for b in bits):
            raise FormatError(f"row must have {n} bits", i + 2)
        rows[i] = int(np.dot(np.array(bits, dtype=np.int64), weights))
    return BinaryArray(n, rows), t


def format_oam(m) -> str:
    """OAM1 text: header ``n N`` then ``word count`` for each present run."""
    m = _as_counts(m)
    lines = [f"{m.n} {m.total}"]
    lines.extend(f"{w} {m.counts[w]}" for w in m.support())
    return "\n".join(lines) + "\n"


def parse_oam(text: str, first_line: int = 1) -> MultiplicityVector:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("missing header", first_line)
    try:
        n, N = map(int, lines[0].split())
    except ValueError:
        raise FormatError("header must be 'n N'", first_line) from None
    if n < 1 or n > 30:
        raise FormatError("unsupported column count", first_line)
    counts = np.zeros(1 << n, dtype=np.int64)
    last = -1
    for i, ln in enumerate(lines[1:], start=first_line + 1):
        if not ln.strip():
            continue
        try:
            w, c = map(int, ln.split())
        except ValueError:
            raise FormatError("expected '<word> <count>'", i) from None
        if w <= last or w >> n or c <= 0:
            raise FormatError("words must ascend within range with positive counts", i)
        counts[w] = c
        last = w
    if counts.sum() != N:
        raise FormatError(f"counts sum to {counts.sum()}, header says {N}", first_line)
    return MultiplicityVector(n, counts)
