"""Provenance-tracked bounds on F(n, 2, t) and the CI weight ω(n, t).

F(n, t) is the least run count of any binary OA with n factors and
strength t; ω(n, t) is the least run count of a simple one, i.e. the
least weight of a t-th order correlation-immune function of n variables.

A :class:`KnowledgeBase` holds lower and upper bounds on both quantities
over a finite (n, t) grid, plus facts of the form "no OA(N, n, 2, t)".
:func:`propagate` closes it under these rules:

* ``F <= ω`` (a simple array is an array);
* ``F(n-1, t-1) <= F(n, t) / 2`` and ``ω(n-1, t-1) <= ω(n, t) / 2``
  (derived arrays), used in both directions;
* ``F(n, t) <= F(n+1, t)`` (column deletion; there is no such rule for
  ω because deleting a column can create repeated rows);
* bounds are multiples of 2^t;
* a lower bound sitting on an excluded run size moves up by 2^t;
* an exclusion at (N, n, t) excludes (N, n+1, t) and (2N, n+1, t+1).

Every fact keeps the facts it came from, so any entry can be explained
back to its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .boolean import nordstrom_robinson
from .core import BinaryArray, ParameterError, delete_columns, derive, is_simple, verify_strength

QUANTITIES = ("F", "omega")
_SYMBOL = {"F": "F", "omega": "ω"}


@dataclass(frozen=True, eq=False)
class Exclusion:
    """No OA(runs, n, 2, t) exists."""

    runs: int
    n: int
    t: int
    rule: str
    premises: tuple = ()
    note: str = ""

    def label(self) -> str:
        return f"no OA({self.runs}, {self.n}, 2, {self.t})"


@dataclass(frozen=True, eq=False)
class BoundFact:
    """``quantity(n, t) relation value`` with the rule that produced it."""

    quantity: str
    n: int
    t: int
    relation: str
    value: int
    rule: str
    premises: tuple = ()
    note: str = ""
    witness: BinaryArray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ParameterError(f"quantity must be one of {QUANTITIES}")
        if self.relation not in (">=", "<=", "="):
            raise ParameterError("relation must be >=, <= or =")
        if self.value < 0:
            raise ParameterError("bound values are nonnegative")
        if self.relation == "=" and {p.relation for p in self.premises} != {">=", "<="}:
            raise ParameterError("an equality needs one lower and one upper premise")
        if self.witness is not None:
            _check_witness(self.witness, self.n, self.t, self.value)

    def label(self) -> str:
        return f"{_SYMBOL[self.quantity]}({self.n},{self.t}) {self.relation} {self.value}"

    def explain(self) -> str:
        return explain(self)


def _check_witness(a: BinaryArray, n: int, t: int, runs: int):
    rep = verify_strength(a, t)
    if not (a.n == n and a.N == runs and rep.ok and is_simple(a)):
        raise ParameterError(f"witness is not a simple OA({runs}, {n}, 2, {t})")


def explain(node) -> str:
    """Numbered derivation listing, inputs first, ``node`` last."""
    order: list = []
    seen: dict[int, int] = {}

    def visit(x):
        if id(x) in seen:
            return
        for p in x.premises:
            visit(p)
        seen[id(x)] = len(order) + 1
        order.append(x)

    visit(node)
    lines = []
    for x in order:
        refs = ", ".join(f"[{seen[id(p)]}]" for p in x.premises)
        src = f"{x.rule}; from {refs}" if refs else x.rule
        extra = f" ({x.note})" if x.note else ""
        lines.append(f"[{seen[id(x)]}] {x.label()}  by {src}{extra}")
    return "\n".join(lines)


def _inputs(node) -> set:
    if not node.premises:
        return {node}
    out = set()
    for p in node.premises:
        out |= _inputs(p)
    return out


class InconsistencyError(ValueError):
    """Two derivations disagree; both are kept for the report."""

    def __init__(self, lower, upper: BoundFact):
        self.lower, self.upper = lower, upper
        super().__init__(
            f"{lower.label()} contradicts {upper.label()}\n"
            f"lower bound:\n{explain(lower)}\nupper bound:\n{explain(upper)}")


class KnowledgeBase:
    """Bounds on a grid tmin <= t <= tmax, t < n <= nmax.

    Instances are not modified in place by :func:`propagate`; the
    ``add_*`` methods do modify and return ``self`` so inputs can be
    chained.
    """

    def __init__(self, tmin: int, tmax: int, nmax: int):
        if not 1 <= tmin <= tmax < nmax:
            raise ParameterError("need 1 <= tmin <= tmax < nmax")
        self.tmin, self.tmax, self.nmax = tmin, tmax, nmax
        self.bounds: dict[tuple, BoundFact] = {}
        self.exclusions: dict[tuple, Exclusion] = {}
        self.closed = False

    # grid
    def points(self):
        for t in range(self.tmin, self.tmax + 1):
            for n in range(t + 1, self.nmax + 1):
                yield n, t

    def on_grid(self, n: int, t: int) -> bool:
        return self.tmin <= t <= self.tmax and t < n <= self.nmax

    def copy(self) -> "KnowledgeBase":
        kb = KnowledgeBase(self.tmin, self.tmax, self.nmax)
        kb.bounds = dict(self.bounds)
        kb.exclusions = dict(self.exclusions)
        kb.closed = self.closed
        return kb

    # queries
    def lower(self, q: str, n: int, t: int) -> BoundFact | None:
        return self.bounds.get((q, n, t, ">="))

    def upper(self, q: str, n: int, t: int) -> BoundFact | None:
        return self.bounds.get((q, n, t, "<="))

    def interval(self, q: str, n: int, t: int) -> tuple[int | None, int | None]:
        lo, hi = self.lower(q, n, t), self.upper(q, n, t)
        return (lo and lo.value, hi and hi.value)

    def exact(self, q: str, n: int, t: int) -> BoundFact | None:
        """The ``=`` fact when both bounds meet, else None."""
        lo, hi = self.lower(q, n, t), self.upper(q, n, t)
        if lo is None or hi is None or lo.value != hi.value:
            return None
        return BoundFact(q, n, t, "=", lo.value, "bounds meet", (lo, hi))

    def facts(self) -> list[BoundFact]:
        return sorted(self.bounds.values(), key=lambda f: (f.quantity, f.t, f.n, f.relation))

    def excluded(self, runs: int, n: int, t: int) -> Exclusion | None:
        return self.exclusions.get((runs, n, t))

    # updates
    def offer(self, fact: BoundFact) -> bool:
        """Keep ``fact`` if it is on the grid and tightens the current bound."""
        if fact.relation == "=":
            raise ParameterError("enter an equality as its two bounds")
        if not self.on_grid(fact.n, fact.t):
            return False
        key = (fact.quantity, fact.n, fact.t, fact.relation)
        old = self.bounds.get(key)
        if old is not None and (fact.value <= old.value if fact.relation == ">=" else fact.value >= old.value):
            return False
        self.bounds[key] = fact
        self.closed = False
        lo, hi = self.lower(*key[:3]), self.upper(*key[:3])
        if lo is not None and hi is not None and lo.value > hi.value:
            raise InconsistencyError(lo, hi)
        return True

    def offer_exclusion(self, ex: Exclusion) -> bool:
        if not self.on_grid(ex.n, ex.t) or (ex.runs, ex.n, ex.t) in self.exclusions:
            return False
        hi = self.upper("omega", ex.n, ex.t)
        if hi is not None and hi.witness is not None and hi.value == ex.runs:
            raise InconsistencyError(ex, hi)
        self.exclusions[(ex.runs, ex.n, ex.t)] = ex
        self.closed = False
        return True

    def add_delsarte(self, n: int, t: int) -> "KnowledgeBase":
        from .lp import delsarte_min_runs

        d = delsarte_min_runs(n, t)
        self.offer(BoundFact("F", n, t, ">=", d.min_runs, "Delsarte LP", note=f"LP optimum {d.lp_value}"))
        return self

    def add_exclusion(self, runs: int, n: int, t: int, rule: str = "asserted", note: str = "") -> "KnowledgeBase":
        if runs % (1 << t):
            raise ParameterError("excluded run sizes must be multiples of 2^t")
        self.offer_exclusion(Exclusion(runs, n, t, rule, (), note))
        return self

    def add_construction(self, a: BinaryArray, t: int, note: str = "") -> "KnowledgeBase":
        """Record a simple OA as ω(n, t) <= N; the array is re-verified here."""
        self.offer(BoundFact("omega", a.n, t, "<=", a.N, "construction", note=note, witness=a))
        return self

    def status(self, q: str, n: int, t: int) -> dict:
        """Bounds at one point and whether they meet."""
        lo, hi = self.interval(q, n, t)
        return {"quantity": q, "n": n, "t": t, "lower": lo, "upper": hi,
                "closed": lo is not None and lo == hi}


def _round(kb: KnowledgeBase, changed: list):
    def push(f: BoundFact):
        if kb.offer(f):
            changed.append(f)

    step = {t: 1 << t for t in range(kb.tmin, kb.tmax + 1)}
    for n, t in kb.points():
        m = step[t]
        if kb.lower("F", n, t) is None:
            push(BoundFact("F", n, t, ">=", m, "every t-tuple occurs at least once"))
        for q in QUANTITIES:
            lo, hi = kb.lower(q, n, t), kb.upper(q, n, t)
            if lo is not None and lo.value % m:
                push(BoundFact(q, n, t, ">=", -(-lo.value // m) * m, f"runs divisible by {m}", (lo,)))
            if hi is not None and hi.value % m:
                push(BoundFact(q, n, t, "<=", hi.value // m * m, f"runs divisible by {m}", (hi,)))
            lo = kb.lower(q, n, t)
            if lo is not None:
                ex = kb.excluded(lo.value, n, t)
                if ex is not None:
                    push(BoundFact(q, n, t, ">=", lo.value + m, "excluded run size", (lo, ex)))

        # F <= omega
        lo, hi = kb.lower("F", n, t), kb.upper("omega", n, t)
        if lo is not None:
            push(BoundFact("omega", n, t, ">=", lo.value, "F <= ω", (lo,)))
        if hi is not None:
            push(BoundFact("F", n, t, "<=", hi.value, "F <= ω", (hi,)))

        # derived arrays: q(n-1, t-1) <= q(n, t) / 2
        if kb.on_grid(n - 1, t - 1):
            for q in QUANTITIES:
                big, small = kb.upper(q, n, t), kb.lower(q, n - 1, t - 1)
                cur = kb.upper(q, n - 1, t - 1)
                if big is not None and (cur is None or big.value // 2 < cur.value):
                    w = None
                    if big.witness is not None:
                        w = derive(big.witness, n - 1, 0, t)
                    sym = _SYMBOL[q]
                    push(BoundFact(q, n - 1, t - 1, "<=", big.value // 2,
                                   f"{sym}(n-1,t-1) <= {sym}(n,t)/2", (big,),
                                   witness=w if w is not None and w.N == big.value // 2 else None))
                if small is not None:
                    sym = _SYMBOL[q]
                    push(BoundFact(q, n, t, ">=", 2 * small.value,
                                   f"{sym}(n-1,t-1) <= {sym}(n,t)/2", (small,)))

        # column deletion: F(n, t) <= F(n+1, t)
        if kb.on_grid(n + 1, t):
            lo, hi = kb.lower("F", n, t), kb.upper("F", n + 1, t)
            if lo is not None:
                push(BoundFact("F", n + 1, t, ">=", lo.value, "F nondecreasing in n", (lo,)))
            if hi is not None:
                push(BoundFact("F", n, t, "<=", hi.value, "F nondecreasing in n", (hi,)))

    for ex in list(kb.exclusions.values()):
        for target, rule in (((ex.runs, ex.n + 1, ex.t), "column deletion"),
                             ((2 * ex.runs, ex.n + 1, ex.t + 1), "derived array")):
            if kb.on_grid(target[1], target[2]) and target not in kb.exclusions:
                if kb.offer_exclusion(Exclusion(*target, rule, (ex,))):
                    changed.append(kb.exclusions[target])


def propagate(kb: KnowledgeBase) -> KnowledgeBase:
    """Least fixed point of the rules, as a new knowledge base.

    Raises InconsistencyError (carrying both derivations) if some lower
    bound ends up above an upper bound.
    """
    out = kb.copy()
    while True:
        changed: list = []
        _round(out, changed)
        if not changed:
            break
    out.closed = True
    return out


# ---------------------------------------------------------------- standard inputs


def nr_truncations(columns: Iterable[int] = range(11, 17)) -> list[BinaryArray]:
    """The Nordstrom-Robinson array cut down to its first k columns."""
    nr = nordstrom_robinson()
    return [delete_columns(nr, range(k, 16)) for k in columns]


def standard_knowledge_base(tmin: int = 4, tmax: int = 5, nmax: int = 16, *,
                            delsarte: bool | Iterable[tuple[int, int]] = True,
                            exclusions: Iterable[tuple] = ((96, 11, 4), (112, 11, 4)),
                            constructions: bool = True) -> KnowledgeBase:
    """Inputs for the ω table: LP bounds, exclusions and NR truncations.

    ``delsarte`` is True for every grid point or an explicit list of
    (n, t). ``exclusions`` holds (N, n, t) or (N, n, t, rule, note)
    tuples; the default pair is the nonexistence of OA(96, 11, 2, 4) and
    OA(112, 11, 2, 4).
    """
    kb = KnowledgeBase(tmin, tmax, nmax)
    pts = list(kb.points()) if delsarte is True else list(delsarte or ())
    for n, t in pts:
        kb.add_delsarte(n, t)
    for ex in exclusions:
        kb.add_exclusion(*ex)
    if constructions:
        for a in nr_truncations(k for k in range(11, 17) if k <= nmax):
            if kb.on_grid(a.n, 5):
                kb.add_construction(a, 5, note=f"Nordstrom-Robinson array, first {a.n} columns")
    return kb


def search_exclusions(budget_seconds: float | None = None) -> list[tuple]:
    """Exclusions proved here by exhaustive search: OA(96, 8, 2, 4) and OA(112, 7, 2, 4).

    Raises RuntimeError if a search is inconclusive or finds an array.
    """
    from .solver import Status, feasible

    out = []
    for runs, n in ((96, 8), (112, 7)):
        r = feasible(n, 4, runs // 16, budget_seconds=budget_seconds)
        if r.status is not Status.UNSAT:
            raise RuntimeError(f"search for OA({runs}, {n}, 2, 4) ended {r.status.value}")
        out.append((runs, n, 4, "exhaustive search",
                    f"{r.method} search, pmax {r.pmax}, {r.nodes} nodes"))
    return out


# ---------------------------------------------------------------- export


def omega_table(kb: KnowledgeBase, quantity: str = "omega", details: bool = True) -> str:
    """Text table of bounds (rows n, columns t) followed by one line per entry's sources."""
    ts = list(range(kb.tmin, kb.tmax + 1))
    ns = list(range(kb.tmin + 1, kb.nmax + 1))
    sym = _SYMBOL[quantity]
    head = "n".rjust(3) + "".join(f"  t={t}".rjust(12) for t in ts)
    lines = [f"{sym}(n,t)", head]
    for n in ns:
        cells = []
        for t in ts:
            if not kb.on_grid(n, t):
                cells.append("".rjust(12))
                continue
            lo, hi = kb.interval(quantity, n, t)
            if lo is not None and lo == hi:
                cells.append(f"{lo}".rjust(12))
            else:
                cells.append(f"[{lo if lo is not None else '?'},{hi if hi is not None else '?'}]".rjust(12))
        lines.append(f"{n:3d}" + "".join(cells))
    if details:
        lines.append("")
        for t in ts:
            for n in ns:
                if not kb.on_grid(n, t):
                    continue
                parts = []
                for f in (kb.lower(quantity, n, t), kb.upper(quantity, n, t)):
                    if f is not None:
                        srcs = sorted({x.rule for x in _inputs(f)})
                        parts.append(f"{f.relation} {f.value} by {f.rule} [inputs: {', '.join(srcs)}]")
                lines.append(f"{sym}({n},{t}): " + "; ".join(parts))
    return "\n".join(lines) + "\n"


def table_rows(kb: KnowledgeBase, quantity: str = "omega") -> list[dict]:
    """Machine-readable form of :func:`omega_table`."""
    out = []
    for n, t in kb.points():
        lo, hi = kb.lower(quantity, n, t), kb.upper(quantity, n, t)
        out.append({"n": n, "t": t, "lower": lo and lo.value, "upper": hi and hi.value,
                    "exact": lo is not None and hi is not None and lo.value == hi.value,
                    "lower_derivation": lo and explain(lo).splitlines(),
                    "upper_derivation": hi and explain(hi).splitlines()})
    return out
