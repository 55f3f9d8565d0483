"""Run-multiplicity equality system for OA(2^t λ, n, 2, t) existence."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .core import CapacityError, MultiplicityVector, ParameterError

MAX_MODEL_FACTORS = 12


@dataclass(frozen=True)
class BalanceRow:
    subset: tuple[int, ...]
    tuple_word: int
    support: np.ndarray  # run words matching tuple_word on subset, ascending


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Balance rows: every t-subset/tuple pair is hit by exactly λ runs."""

    n: int
    t: int
    index: int
    rows: tuple[BalanceRow, ...]

    @property
    def variable_count(self) -> int:
        return 1 << self.n

    @property
    def runs(self) -> int:
        return self.index << self.t

    @property
    def rhs(self) -> np.ndarray:
        return np.full(len(self.rows), self.index, dtype=np.int64)

    def total_row(self) -> tuple[np.ndarray, int]:
        return np.arange(1 << self.n), self.runs

    def dense(self, include_total: bool = False) -> np.ndarray:
        """0/1 matrix of the balance rows (optionally with the total row last)."""
        m = np.zeros((len(self.rows) + include_total, 1 << self.n), dtype=np.int64)
        for i, row in enumerate(self.rows):
            m[i, row.support] = 1
        if include_total:
            m[-1] = 1
        return m

    def residual(self, m: MultiplicityVector) -> np.ndarray:
        if m.n != self.n:
            raise ParameterError("column count mismatch")
        sums = np.array([m.counts[row.support].sum() for row in self.rows], dtype=np.int64)
        return sums - self.index

    def is_satisfied(self, m: MultiplicityVector) -> bool:
        return not self.residual(m).any() and m.total == self.runs


def _projection(n: int, cols) -> np.ndarray:
    words = np.arange(1 << n, dtype=np.int64)
    proj = np.zeros_like(words)
    for j, c in enumerate(cols):
        proj |= ((words >> c) & 1) << j
    return proj


@lru_cache(maxsize=None)
def _rows(n: int, t: int) -> tuple[BalanceRow, ...]:
    out = []
    for cols in itertools.combinations(range(n), t):
        proj = _projection(n, cols)
        order = np.argsort(proj, kind="stable")
        chunks = np.split(order, 1 << t)
        for u, chunk in enumerate(chunks):
            chunk.flags.writeable = False
            out.append(BalanceRow(cols, u, chunk))
    return tuple(out)


def build_constraints(n: int, t: int, index: int) -> ConstraintSystem:
    if n > MAX_MODEL_FACTORS:
        raise CapacityError(f"constraint systems are built for n <= {MAX_MODEL_FACTORS}")
    if not 1 <= t < n:
        raise ParameterError("need 1 <= t < n")
    if index < 1:
        raise ParameterError("index must be at least 1")
    return ConstraintSystem(n, t, index, _rows(n, t))


def integer_rank(matrix, return_pivot_rows: bool = False):
    """Exact rank of an integer matrix by fraction-free elimination.

    Rows are eliminated against the first nonzero pivot in each column
    and re-normalised by their gcd, so entries stay small. With
    ``return_pivot_rows`` also returns the indices of a maximal set of
    independent input rows.
    """
    m = np.array(matrix, dtype=np.int64)
    if m.ndim != 2:
        raise ParameterError("expected a 2-d matrix")
    rows_left = np.arange(m.shape[0])
    pivots = []
    work = m.copy()
    for col in range(m.shape[1]):
        if work.shape[0] == 0:
            break
        nz = np.flatnonzero(work[:, col])
        if nz.size == 0:
            continue
        p = nz[0]
        prow = work[p]
        pivots.append(int(rows_left[p]))
        rest = np.delete(np.arange(work.shape[0]), p)
        work, rows_left = work[rest], rows_left[rest]
        hit = work[:, col] != 0
        if hit.any():
            sub = work[hit]
            if max(np.abs(sub).max(), np.abs(prow).max()) ** 2 > (1 << 61):
                return _object_rank(m, return_pivot_rows)
            sub = prow[col] * sub - sub[:, col:col + 1] * prow
            g = np.gcd.reduce(sub, axis=1)
            g[g == 0] = 1
            work[hit] = sub // g[:, None]
        keep = work.any(axis=1)
        work, rows_left = work[keep], rows_left[keep]
    if return_pivot_rows:
        return len(pivots), pivots
    return len(pivots)


def _object_rank(matrix, return_pivot_rows):
    # Python-int fallback when int64 could overflow.
    rows = [list(map(int, r)) for r in np.asarray(matrix)]
    basis: dict[int, list[int]] = {}
    pivots = []
    for i, r in enumerate(rows):
        r = r[:]
        for col, b in sorted(basis.items()):
            if r[col]:
                a, c = b[col], r[col]
                r = [a * x - c * y for x, y in zip(r, b)]
        lead = next((j for j, x in enumerate(r) if x), None)
        if lead is not None:
            basis[lead] = r
            pivots.append(i)
    return (len(pivots), pivots) if return_pivot_rows else len(pivots)


@lru_cache(maxsize=None)
def _rank_nt(n: int, t: int, include_total: bool) -> int:
    return integer_rank(build_constraints(n, t, 1).dense(include_total))


def rank(cs: ConstraintSystem, include_total: bool = False) -> int:
    """Number of linearly independent equations in ``cs``.

    The right-hand side is uniform, so the value depends only on (n, t)
    and is cached per pair.
    """
    return _rank_nt(cs.n, cs.t, include_total)


def independent_rows(cs: ConstraintSystem) -> list[int]:
    """Indices of a maximal independent subset of the balance rows."""
    _, piv = integer_rank(cs.dense(), return_pivot_rows=True)
    return piv


def expected_rank(n: int, t: int) -> int:
    """Closed form: the balance rows span the characters of weight <= t."""
    return sum(comb(n, k) for k in range(t + 1))


def format_lp_text(cs: ConstraintSystem, include_total: bool = True) -> str:
    """Export the system in the plain-text LP exchange format of ``binoa.lp``."""
    from .lp import LPProblem, format_problem

    width = 1 << cs.n
    cons = []
    for row in cs.rows:
        coef = [0] * width
        for w in row.support:
            coef[int(w)] = 1
        cons.append((coef, "=", cs.index))
    if include_total:
        cons.append(([1] * width, "=", cs.runs))
    return format_problem(LPProblem([0] * width, "min", cons))
