"""Exact linear programming over the rationals, Krawtchouk polynomials and LP bounds.

The simplex keeps an all-integer tableau with a common denominator (the
determinant of the current basis), so every pivot is an exact integer
update and no fractions are formed until the solution is read off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, floor, ceil, lcm
from typing import Sequence

import numpy as np

from .core import ParameterError

Rational = Fraction

RELATIONS = ("<=", "=", ">=")


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted by the exact LP; pass int, Fraction or 'p/q'")
    return Fraction(x)


@dataclass(frozen=True)
class LPProblem:
    """``sense`` c.x subject to rows (a, rel, b); variables >= lower bound.

    A lower bound of None means the variable is free.
    """

    objective: tuple
    sense: str = "min"
    constraints: tuple = ()
    lower: tuple | None = None

    def __post_init__(self):
        obj = tuple(_q(c) for c in self.objective)
        object.__setattr__(self, "objective", obj)
        if self.sense not in ("min", "max"):
            raise ParameterError("sense must be 'min' or 'max'")
        cons = []
        for coef, rel, rhs in self.constraints:
            coef = tuple(_q(a) for a in coef)
            if len(coef) != len(obj):
                raise ParameterError("constraint width differs from objective width")
            if rel not in RELATIONS:
                raise ParameterError(f"unknown relation {rel!r}")
            cons.append((coef, rel, _q(rhs)))
        object.__setattr__(self, "constraints", tuple(cons))
        lower = self.lower
        if lower is None:
            lower = (Fraction(0),) * len(obj)
        elif len(lower) != len(obj):
            raise ParameterError("lower bound vector has the wrong width")
        object.__setattr__(self, "lower", tuple(None if l is None else _q(l) for l in lower))

    @property
    def width(self) -> int:
        return len(self.objective)

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), Fraction(0))

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        """Exact re-substitution check of ``x`` against every constraint."""
        if len(x) != self.width:
            return False
        for l, v in zip(self.lower, x):
            if l is not None and v < l:
                return False
        for coef, rel, rhs in self.constraints:
            lhs = sum((a * v for a, v in zip(coef, x) if a), Fraction(0))
            if rel == "<=" and lhs > rhs or rel == ">=" and lhs < rhs or rel == "=" and lhs != rhs:
                return False
        return True


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple | None = None
    dual: tuple | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Integer tableau ``T`` representing ``T / D``; last column is the rhs."""

    def __init__(self, rows: np.ndarray, basis: list[int]):
        self.T = rows
        self.D = 1
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, s: int):
        T = self.T
        p = T[r, s]
        col = T[:, s].copy()
        prow = T[r].copy()
        # Sylvester identity: every update divides exactly by the old denominator.
        nz = np.flatnonzero(col != 0)
        nz = nz[nz != r]
        if nz.size:
            sub = T[nz] * p - col[nz, None] * prow[None, :]
            if self.D != 1:
                sub = sub // self.D
            T[nz] = sub
        others = np.flatnonzero(col == 0)
        others = others[others != r]
        if others.size and p != self.D:
            T[others] = (T[others] * p) // self.D
        self.D = p
        if p < 0:
            T *= -1
            self.D = -p
        self.basis[r] = s
        self.pivots += 1


def _simplex(tab: _Tableau, m: int, obj_row: int, allowed: np.ndarray,
             max_pivots: int | None, rule: str = "bland") -> str:
    """Minimise the objective in ``obj_row`` over constraint rows 0..m-1.

    ``rule="bland"``: lowest-index improving column enters. ``"dantzig"``:
    most negative reduced cost enters, but after ``_STALL`` consecutive
    degenerate pivots Bland's rule takes over until the objective moves,
    which keeps the method finite. Ratio-test ties always go to the
    lowest-index basic variable.
    """
    T = tab.T
    stall = 0
    while True:
        red = T[obj_row, :-1]
        cand = np.flatnonzero(allowed & (red < 0))
        if cand.size == 0:
            return "optimal"
        if rule == "bland" or stall >= _STALL:
            s = int(cand[0])
        else:
            s = int(cand[int(np.argmin(red[cand]))])
        col = T[:m, s]
        pos = np.flatnonzero(col > 0)
        if pos.size == 0:
            return "unbounded"
        rhs = T[:m, -1]
        best = int(pos[0])
        for i in pos[1:]:
            lhs_v = rhs[i] * col[best]
            rhs_v = rhs[best] * col[i]
            if lhs_v < rhs_v or (lhs_v == rhs_v and tab.basis[i] < tab.basis[best]):
                best = int(i)
        stall = stall + 1 if rhs[best] == 0 else 0
        tab.pivot(best, s)
        if max_pivots is not None and tab.pivots > max_pivots:
            raise RuntimeError("pivot limit exceeded")


_STALL = 50


def lp_solve(p: LPProblem, max_pivots: int | None = None, rule: str = "dantzig") -> LPResult:
    """Solve ``p`` exactly with a two-phase simplex.

    ``rule`` picks the entering column (see ``_simplex``); Bland's rule
    takes over on degenerate stalls either way, so the method terminates.

    Optimal results carry the primal point and a dual vector (one entry
    per constraint); both are re-verified in exact arithmetic before
    returning.
    """
    # x_j = lower_j + x'_j, free variables split into x+ - x-
    cols = []  # (original index, sign)
    for j, l in enumerate(p.lower):
        cols.append((j, 1))
        if l is None:
            cols.append((j, -1))
    shift = [l if l is not None else Fraction(0) for l in p.lower]
    rows, rhs, rels = [], [], []
    for coef, rel, b in p.constraints:
        rows.append([coef[j] * sg for j, sg in cols])
        rhs.append(b - sum((a * s for a, s in zip(coef, shift) if a), Fraction(0)))
        rels.append(rel)
    m = len(rows)
    nx = len(cols)
    slack_of = {}
    for i, rel in enumerate(rels):
        if rel != "=":
            slack_of[i] = nx + len(slack_of)
    ns = len(slack_of)
    width = nx + ns + m  # structural, slack, artificial
    T = np.zeros((m + 2, width + 1), dtype=object)
    T[:] = 0
    row_scale = []
    for i in range(m):
        vals = rows[i] + [rhs[i]]
        if i in slack_of:
            vals = vals[:-1] + [Fraction(1 if rels[i] == "<=" else -1)] + [vals[-1]]
        sign = -1 if vals[-1] < 0 else 1
        den = lcm(*(v.denominator for v in vals))
        scale = sign * den
        row_scale.append(scale)
        ints = [int(v * scale) for v in vals]
        T[i, :nx] = ints[:nx]
        if i in slack_of:
            T[i, slack_of[i]] = ints[nx]
        T[i, nx + ns + i] = 1
        T[i, -1] = ints[-1]
    # objective (min form), integer scaled
    c = [p.objective[j] * sg for j, sg in cols]
    if p.sense == "max":
        c = [-v for v in c]
    cden = lcm(*(v.denominator for v in c)) if c else 1
    c_int = [int(v * cden) for v in c] + [0] * (ns + m)
    art = slice(nx + ns, nx + ns + m)
    # phase-one objective row m+1: minimise sum of artificials
    T[m + 1, : nx + ns] = -T[:m, : nx + ns].sum(axis=0) if m else 0
    T[m + 1, -1] = -T[:m, -1].sum() if m else 0
    T[m, :-1] = c_int
    tab = _Tableau(T, list(range(nx + ns, nx + ns + m)))

    allowed = np.ones(width, dtype=bool)
    # row m (phase-two objective) is updated by every phase-one pivot as well
    status = _simplex(tab, m, m + 1, allowed, max_pivots, rule)
    if status != "optimal" or T[m + 1, -1] != 0:
        return LPResult("infeasible", pivots=tab.pivots)
    # drive artificial variables out of the basis where possible
    redundant = []
    for r in range(m):
        if tab.basis[r] >= nx + ns:
            nzc = np.flatnonzero(T[r, : nx + ns] != 0)
            if nzc.size:
                tab.pivot(r, int(nzc[0]))
            else:
                redundant.append(r)
    allowed[art] = False
    live = np.array([r for r in range(m) if r not in redundant] + [m], dtype=np.int64)
    sub = _Tableau(T[live].copy(), [tab.basis[r] for r in live[:-1]])
    sub.D = tab.D
    sub.pivots = tab.pivots
    status = _simplex(sub, len(live) - 1, len(live) - 1, allowed, max_pivots, rule)
    if status == "unbounded":
        return LPResult("unbounded", pivots=sub.pivots)

    T2 = sub.T
    D = sub.D
    xs = [Fraction(0)] * width
    for r, v in enumerate(sub.basis):
        xs[v] = Fraction(int(T2[r, -1]), int(D))
    x = list(shift)
    for k, (j, sg) in enumerate(cols):
        x[j] += sg * xs[k]
    x = tuple(x)
    value = p.value(x)
    # duals: y_i = -(reduced cost of artificial i) / cden, undo row scaling
    dual = []
    for i in range(m):
        red = Fraction(int(T2[-1, nx + ns + i]), int(D))
        y = -red / cden * row_scale[i]
        dual.append(y if p.sense == "min" else -y)
    dual = tuple(dual)
    if not p.is_feasible(x):
        raise AssertionError("simplex returned an infeasible point")
    if not _check_dual(p, dual, value):
        raise AssertionError("simplex returned an invalid dual certificate")
    return LPResult("optimal", value, x, dual, sub.pivots)


def _check_dual(p: LPProblem, y, value) -> bool:
    """Weak-duality certificate: dual feasible and b.y equals the primal value."""
    sgn = 1 if p.sense == "min" else -1
    # min c x, rows a x (rel) b, x >= l: need c - A^T y >= 0 on bounded vars, = 0 on free vars,
    # y_i >= 0 for >=, y_i <= 0 for <= (min form); objective b.y + l.(c - A^T y)
    for (coef, rel, b), yi in zip(p.constraints, y):
        yi = sgn * yi
        if rel == ">=" and yi < 0 or rel == "<=" and yi > 0:
            return False
    total = Fraction(0)
    for (coef, rel, b), yi in zip(p.constraints, y):
        total += sgn * yi * b
    for j in range(p.width):
        red = sgn * p.objective[j] - sum((sgn * yi * coef[j] for (coef, _, _), yi in zip(p.constraints, y) if coef[j]), Fraction(0))
        l = p.lower[j]
        if l is None:
            if red != 0:
                return False
        else:
            if red < 0:
                return False
            total += red * l
    return total == sgn * value


# ---------------------------------------------------------------- text exchange format


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_problem(p: LPProblem) -> str:
    """Plain-text LP: header, objective, bounds, one constraint per line."""
    out = [f"LP1 {p.sense} {p.width} {len(p.constraints)}"]
    out.append("obj " + " ".join(_fmt(c) for c in p.objective))
    out.append("lb " + " ".join("-inf" if l is None else _fmt(l) for l in p.lower))
    for coef, rel, rhs in p.constraints:
        out.append(f"con {rel} {_fmt(rhs)} : " + " ".join(_fmt(a) for a in coef))
    return "\n".join(out) + "\n"


def parse_problem(text: str) -> LPProblem:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        tag, sense, width, count = lines[0].split()
        if tag != "LP1":
            raise ValueError
        width, count = int(width), int(count)
        obj = [Fraction(v) for v in lines[1].split()[1:]]
        lb = [None if v == "-inf" else Fraction(v) for v in lines[2].split()[1:]]
        cons = []
        for ln in lines[3:3 + count]:
            head, body = ln.split(":")
            _, rel, rhs = head.split()
            cons.append(([Fraction(v) for v in body.split()], rel, Fraction(rhs)))
    except (ValueError, IndexError) as exc:
        raise ParameterError(f"malformed LP text: {exc}") from None
    if len(obj) != width or len(lb) != width or len(cons) != count:
        raise ParameterError("malformed LP text: widths do not match header")
    return LPProblem(obj, sense, cons, lb)


def format_certificate(r: LPResult) -> str:
    out = [f"status {r.status}"]
    if r.optimal:
        out.append(f"value {_fmt(r.value)}")
        out.append("x " + " ".join(_fmt(v) for v in r.x))
        out.append("dual " + " ".join(_fmt(v) for v in r.dual))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- Krawtchouk / Delsarte


def krawtchouk(k: int, i: int, n: int) -> int:
    """Binary Krawtchouk polynomial K_k(i; n) = sum_j (-1)^j C(i, j) C(n-i, k-j)."""
    if n < 0 or not 0 <= k <= n or not 0 <= i <= n:
        raise ParameterError(f"need 0 <= k, i <= n (got k={k}, i={i}, n={n})")
    return sum((-1) ** j * comb(i, j) * comb(n - i, k - j) for j in range(min(i, k) + 1))


def delsarte_problem(n: int, t: int) -> LPProblem:
    """Distance-distribution LP whose optimum lower-bounds the runs of any OA(N, n, 2, t)."""
    if not 1 <= t < n:
        raise ParameterError("need 1 <= t < n")
    cons = [([1] + [0] * n, "=", 1)]
    for k in range(1, n + 1):
        rel = "=" if k <= t else ">="
        cons.append(([krawtchouk(k, i, n) for i in range(n + 1)], rel, 0))
    return LPProblem([1] * (n + 1), "min", cons)


@dataclass(frozen=True)
class DelsarteBound:
    n: int
    t: int
    lp_value: Fraction
    min_lambda: int
    result: LPResult = field(repr=False, compare=False)

    @property
    def min_runs(self) -> int:
        return self.min_lambda << self.t


def delsarte_min_runs(n: int, t: int) -> DelsarteBound:
    res = lp_solve(delsarte_problem(n, t))
    if not res.optimal:
        raise RuntimeError(f"Delsarte LP for n={n}, t={t} is {res.status}")
    return DelsarteBound(n, t, res.value, ceil(res.value / (1 << t)), res)


def distance_distribution(a) -> tuple[Fraction, ...]:
    """Inner distance distribution A_i = #{ordered pairs at distance i} / N."""
    from .core import BinaryArray

    if not isinstance(a, BinaryArray):
        raise TypeError("expected a BinaryArray")
    counts = np.bincount(a.rows, minlength=1 << a.n).astype(np.int64)
    wt = np.array([bin(w).count("1") for w in range(1 << a.n)])
    dist = np.zeros(a.n + 1, dtype=np.int64)
    sup = np.flatnonzero(counts)
    for r in sup:
        np.add.at(dist, wt[sup ^ r], counts[r] * counts[sup])
    return tuple(Fraction(int(v), a.N) for v in dist)


def balance_max_problem(n: int, t: int, index: int) -> LPProblem:
    """Maximise the all-zero run count over the independent balance rows, x >= 0."""
    from .model import build_constraints, independent_rows

    cs = build_constraints(n, t, index)
    width = 1 << n
    cons = []
    for i in independent_rows(cs):
        coef = [0] * width
        for w in cs.rows[i].support:
            coef[int(w)] = 1
        cons.append((coef, "=", index))
    return LPProblem([1] + [0] * (width - 1), "max", cons)


@dataclass(frozen=True)
class MultiplicityBound:
    n: int
    t: int
    index: int
    lp_value: Fraction | None
    pmax: int

    @property
    def lp_infeasible(self) -> bool:
        return self.lp_value is None


def lp_max_multiplicity_bound(n: int, t: int, index: int) -> MultiplicityBound:
    res = lp_solve(balance_max_problem(n, t, index))
    if res.status == "infeasible":
        return MultiplicityBound(n, t, index, None, 0)
    if not res.optimal:
        raise RuntimeError(f"multiplicity LP is {res.status}")
    return MultiplicityBound(n, t, index, res.value, floor(res.value))


def lp_max_multiplicity(n: int, t: int, index: int) -> int:
    """Upper bound on how often any single run can occur in an OA(2^t λ, n, 2, t).

    Level swaps move any run to the all-zero word, so maximising that
    one count bounds them all. Returns 0 if the LP is infeasible.
    """
    return lp_max_multiplicity_bound(n, t, index).pmax
