"""Exact existence decisions and isomorphism classification.

Two search routes share the integer engine in :mod:`binoa.engine`:

* ``direct`` treats all 2^n run counts as variables under the balance
  rows of every column subset of size <= t.
* ``extend`` starts from class representatives on ``a`` columns and
  searches for a new column, recorded per run as how many copies of that
  run get value 1. Every OA on a + 1 columns restricts to some class on
  a columns, so extending all classes finds every class on a + 1.

Both routes prune with lex-leader constraints over (a subset of) the
problem's symmetry group and split work into independent subtree tasks.
Results are merged by canonical form, so they do not depend on how the
tasks were scheduled. A search that runs out of budget reports
``INDETERMINATE`` and is never read as nonexistence.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    BinaryArray,
    CanonicalForm,
    IsoOp,
    MultiplicityVector,
    OAParams,
    ParameterError,
    automorphism_tables,
    canonical_form,
    verify_strength,
)
from .engine import Search
from .lp import lp_max_multiplicity

MAX_DIRECT_FACTORS = 8
# lex-leader checks cost O(|H|) per node; larger groups are truncated
MAX_SYMMETRIES = 50_000
_CHUNK = 5_000


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of an existence search for OA(2^t λ, n, 2, t)."""

    params: OAParams
    status: Status
    witnesses: tuple[MultiplicityVector, ...]
    nodes: int
    wall_time: float
    pmax: int
    method: str

    @property
    def conclusive(self) -> bool:
        return self.status is not Status.INDETERMINATE


@dataclass(frozen=True)
class ClassReport:
    """Isomorphism classes on ``factors`` columns; complete unless INDETERMINATE."""

    factors: int
    strength: int
    index: int
    status: Status
    classes: tuple[CanonicalForm, ...]
    nodes: int
    wall_time: float
    method: str
    raw_solutions: int = 0

    @property
    def complete(self) -> bool:
        return self.status is not Status.INDETERMINATE

    @property
    def params(self) -> OAParams:
        return OAParams.from_index(self.factors, self.strength, self.index)

    def __len__(self):
        return len(self.classes)


@dataclass
class Budget:
    """Wall-clock and node limits shared by every task of one call."""

    seconds: float | None = None
    nodes: int | None = None
    start: float = field(default_factory=time.monotonic)
    used: int = 0

    @property
    def deadline(self) -> float | None:
        return None if self.seconds is None else self.start + self.seconds

    def node_room(self) -> int | None:
        return None if self.nodes is None else max(0, self.nodes - self.used)

    def exhausted(self) -> bool:
        if self.nodes is not None and self.used >= self.nodes:
            return True
        return self.seconds is not None and time.monotonic() >= self.start + self.seconds

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def default_workers() -> int:
    """Worker count from ``BINOA_WORKERS`` (default 1)."""
    raw = os.environ.get("BINOA_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ParameterError(f"BINOA_WORKERS must be an integer, got {raw!r}") from None
    if w < 1:
        raise ParameterError("BINOA_WORKERS must be at least 1")
    return w


@lru_cache(maxsize=None)
def pmax_bound(n: int, t: int, index: int) -> int:
    return lp_max_multiplicity(n, t, index)


# ---------------------------------------------------------------- problems


def _cells(runs: np.ndarray, cols: Sequence[int]) -> np.ndarray:
    proj = np.zeros_like(runs)
    for j, c in enumerate(cols):
        proj |= ((runs >> c) & 1) << j
    return proj


def _rows_for(runs: np.ndarray, n: int, top: int, index: int):
    """Balance rows over ``runs`` for every column subset of size <= ``top``.

    A subset of size k gets right-hand side λ·2^(top-k). The rows of size
    < top are implied by the size-``top`` ones but give propagation more
    to work with.
    """
    rows, rhs = [], []
    for k in range(top + 1):
        for cols in itertools.combinations(range(n), k):
            proj = _cells(runs, cols)
            for u in range(1 << k):
                rows.append(np.flatnonzero(proj == u))
                rhs.append(index << (top - k))
    return rows, np.array(rhs, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class _Problem:
    rows: tuple
    rhs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    symmetries: tuple[np.ndarray, np.ndarray]
    complement: np.ndarray | None

    def search(self, lo=None, hi=None, max_depth=-1) -> Search:
        return Search(self.rows, self.rhs,
                      self.lo if lo is None else lo, self.hi if hi is None else hi,
                      first_fail=False, max_depth=max_depth,
                      symmetries=self.symmetries, complement=self.complement)


def _direct_group(n: int) -> list[IsoOp]:
    if math.factorial(n) << n <= MAX_SYMMETRIES:
        perms = list(itertools.permutations(range(n)))
    else:
        # all level swaps combined with the identity and every transposition
        perms = [tuple(range(n))]
        for i, j in itertools.combinations(range(n), 2):
            p = list(range(n))
            p[i], p[j] = j, i
            perms.append(tuple(p))
    return [IsoOp(p, m) for p in perms for m in range(1 << n)]


@lru_cache(maxsize=32)
def _direct_problem(n: int, t: int, index: int, pmax: int) -> _Problem:
    runs = np.arange(1 << n, dtype=np.int64)
    rows, rhs = _rows_for(runs, n, t, index)
    src = []
    for g in _direct_group(n)[1:MAX_SYMMETRIES + 1]:
        # y'[g(r)] = y[r], so position i reads from g^-1(i)
        src.append(np.argsort(g.table()))
    src = np.array(src, dtype=np.int64).reshape(-1, 1 << n)
    sym = (src, np.zeros(len(src), dtype=bool))
    return _Problem(tuple(rows), rhs, np.zeros(1 << n, dtype=np.int64),
                    np.full(1 << n, pmax, dtype=np.int64), sym, None)


@lru_cache(maxsize=256)
def _extension_problem(counts_key: bytes, a: int, t: int, index: int, pmax: int) -> _Problem:
    c = np.frombuffer(counts_key, dtype=np.int64)
    runs = np.flatnonzero(c)
    cr = c[runs]
    rows, rhs = _rows_for(runs, a, t - 1, index)
    pos = np.full(1 << a, -1, dtype=np.int64)
    pos[runs] = np.arange(runs.size)
    aut = automorphism_tables(MultiplicityVector(a, c))
    inv = np.argsort(aut, axis=1)
    src = pos[inv[:, runs]]
    # Aut(rep) x {keep, complement the new column}, minus the identity;
    # interleaved so a truncated list still holds both kinds
    src = np.repeat(src, 2, axis=0)[1:MAX_SYMMETRIES + 1]
    comp = np.tile([False, True], len(aut))[1:MAX_SYMMETRIES + 1]
    lo = np.maximum(0, cr - pmax)
    hi = np.minimum(cr, pmax)
    return _Problem(tuple(rows), rhs, lo, hi, (src, comp), cr)


def _lift(c: np.ndarray, a: int, y: np.ndarray) -> np.ndarray:
    runs = np.flatnonzero(c)
    x = np.zeros(2 << a, dtype=np.int64)
    x[runs] = c[runs] - y
    x[runs + (1 << a)] = y
    return x


# ---------------------------------------------------------------- tasks


@dataclass(frozen=True)
class _Task:
    key: str
    kind: str  # "direct" or "extend"
    a: int
    t: int
    index: int
    pmax: int
    counts: bytes | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def problem(self) -> _Problem:
        if self.kind == "direct":
            return _direct_problem(self.a, self.t, self.index, self.pmax)
        return _extension_problem(self.counts, self.a, self.t, self.index, self.pmax)

    def solution_counts(self, y: np.ndarray) -> MultiplicityVector:
        if self.kind == "direct":
            return MultiplicityVector(self.a, y)
        c = np.frombuffer(self.counts, dtype=np.int64)
        return MultiplicityVector(self.a + 1, _lift(c, self.a, y))


@dataclass(frozen=True)
class _TaskResult:
    key: str
    done: bool
    nodes: int
    raw: int
    classes: tuple[CanonicalForm, ...]
    witnesses: tuple[MultiplicityVector, ...]


def _run_task(task: _Task, deadline: float | None, node_room: int | None,
              stop_first: bool) -> _TaskResult:
    s = task.problem().search(task.lo, task.hi)
    classes: dict[bytes, CanonicalForm] = {}
    witnesses = []
    raw = 0
    limit = node_room if node_room is not None else 1 << 62
    while not s.done:
        if deadline is not None and time.monotonic() >= deadline:
            break
        before = s.nodes
        _, sols, _ = s.step(min(_CHUNK, limit))
        limit -= s.nodes - before
        for y in sols:
            m = task.solution_counts(y)
            raw += 1
            if stop_first:
                witnesses.append(m)
                return _TaskResult(task.key, True, s.nodes, raw, (), tuple(witnesses))
            cf = canonical_form(m)
            classes.setdefault(cf.key(), cf)
        if limit <= 0:
            break
    return _TaskResult(task.key, s.done, s.nodes, raw, tuple(classes.values()), tuple(witnesses))


def _split(task: _Task, depth: int) -> tuple[list[_Task], _TaskResult]:
    """Cut ``task`` at ``depth`` into frontier subtasks plus the leaves above it."""
    if depth <= 0:
        return [task], _TaskResult(task.key + "/", True, 0, 0, (), ())
    s = task.problem().search(task.lo, task.hi, max_depth=depth)
    subs, classes, raw = [], {}, 0
    while not s.done:
        _, sols, (flo, fhi) = s.step(1 << 40)
        for y in sols:
            raw += 1
            cf = canonical_form(task.solution_counts(y))
            classes.setdefault(cf.key(), cf)
        for lo, hi in zip(flo, fhi):
            subs.append(_Task(f"{task.key}.{len(subs)}", task.kind, task.a, task.t, task.index,
                              task.pmax, task.counts, lo, hi))
    return subs, _TaskResult(task.key + "/", True, s.nodes, raw, tuple(classes.values()), ())


def _execute(tasks: list[_Task], budget: Budget, workers: int, stop_first: bool,
             skip: Iterable[str] = (),
             on_result: Callable[[_TaskResult], None] | None = None) -> tuple[list[_TaskResult], bool]:
    """Run tasks, returning their results in task order and whether all finished.

    With ``stop_first`` the run ends at the first task (in task order, not
    completion order) that yields a solution, so the witness is the same
    for every worker count.
    """
    skip = set(skip)
    todo = [t for t in tasks if t.key not in skip]
    results: dict[str, _TaskResult] = {}
    complete = True

    def record(r: _TaskResult):
        nonlocal complete
        budget.used += r.nodes
        results[r.key] = r
        complete &= r.done
        if on_result is not None and r.done:
            on_result(r)

    if workers <= 1 or len(todo) <= 1:
        for task in todo:
            if budget.exhausted():
                complete = False
                break
            r = _run_task(task, budget.deadline, budget.node_room(), stop_first)
            record(r)
            if stop_first and r.witnesses:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_task, task, budget.deadline, budget.node_room(), stop_first)
                       for task in todo]
            for task, fut in zip(todo, futures):
                if stop_first and any(r.witnesses for r in results.values()):
                    fut.cancel()
                    continue
                r = fut.result()
                record(r)
            if stop_first:
                for fut in futures:
                    fut.cancel()
    if stop_first and any(r.witnesses for r in results.values()):
        complete = True
    return [results[t.key] for t in todo if t.key in results], complete


def _merge(results: Iterable[_TaskResult]) -> tuple[CanonicalForm, ...]:
    merged: dict[bytes, CanonicalForm] = {}
    for r in results:
        for cf in r.classes:
            merged.setdefault(cf.key(), cf)
    return tuple(sorted(merged.values()))


# ---------------------------------------------------------------- public API


def _check(n: int, t: int, index: int):
    if not 1 <= t < n:
        raise ParameterError("need 1 <= t < n")
    if index < 1:
        raise ParameterError("index must be at least 1")


def _method(method: str, n: int, direct_up_to: int) -> str:
    if method == "auto":
        return "direct" if n <= direct_up_to else "extend"
    if method not in ("direct", "extend"):
        raise ParameterError(f"unknown method {method!r}")
    if method == "direct" and n > MAX_DIRECT_FACTORS:
        raise ParameterError(f"direct search supports n <= {MAX_DIRECT_FACTORS}")
    return method


def base_class(t: int, index: int) -> CanonicalForm:
    """The only OA(2^t λ, t, 2, t): every run λ times."""
    return canonical_form(MultiplicityVector(t, np.full(1 << t, index, dtype=np.int64)))


def extend_classes(reps: Sequence, t: int, index: int, *, pmax: int | None = None,
                   budget_seconds: float | None = None, node_budget: int | None = None,
                   workers: int = 1, split_depth: int = 0,
                   checkpoint=None) -> ClassReport:
    """Classes on a + 1 columns obtained by adding a column to every rep.

    ``reps`` are BinaryArrays or MultiplicityVectors with a factors, each
    an OA of strength t and index λ. ``pmax`` caps run counts on a + 1
    columns and defaults to the LP bound. ``checkpoint`` is an optional
    path; finished tasks are recorded there and skipped when the same job
    is resumed.
    """
    reps = [r.multiplicities() if isinstance(r, BinaryArray) else
            (r.counts if isinstance(r, CanonicalForm) else r) for r in reps]
    if not reps:
        raise ParameterError("need at least one representative")
    a = reps[0].n
    _check(a + 1, t, index)
    for r in reps:
        if r.n != a:
            raise ParameterError("representatives have different column counts")
        if a > t:
            rep = verify_strength(r.array(), t)
            good = rep.ok and rep.index == index
        else:
            good = bool((r.counts == index).all())
        if not good:
            raise ParameterError(f"representative is not an OA({index << t}, {a}, 2, {t})")
    budget = Budget(budget_seconds, node_budget)
    lp_bound = pmax_bound(a + 1, t, index)
    P = lp_bound if pmax is None else min(pmax, lp_bound)
    keys = sorted({canonical_form(r).key() for r in reps})
    tasks, pre = [], []
    for i, key in enumerate(keys):
        m = _counts_from_key(key, a)
        root = _Task(f"{a}:{i}", "extend", a, t, index, P, m.counts.astype(np.int64).tobytes())
        subs, leaves = _split(root, split_depth)
        tasks.extend(subs)
        pre.append(leaves)
    job = {"op": "extend", "a": a, "t": t, "index": index, "pmax": P,
           "split": split_depth, "reps": [k.hex() for k in keys]}
    return _classify_tasks(job, tasks, pre, budget, workers, checkpoint,
                           a + 1, t, index, "extend")


def _counts_from_key(key: bytes, n: int) -> MultiplicityVector:
    return MultiplicityVector(n, np.frombuffer(key, dtype=np.uint16).astype(np.int64))


def _classify_tasks(job, tasks, pre, budget, workers, checkpoint, n, t, index, method) -> ClassReport:
    from .store import checkpoint as save_state, resume as resume_state

    state = resume_state(job, checkpoint) if checkpoint is not None else None
    finished: dict[str, list] = dict(state["finished"]) if state else {}
    carried_nodes = state["nodes"] if state else 0

    def on_result(r: _TaskResult):
        finished[r.key] = [(cf.counts.counts.tolist()) for cf in r.classes]
        if checkpoint is not None:
            save_state(job, {"finished": finished, "nodes": carried_nodes + budget.used}, checkpoint)

    results, complete = _execute(tasks, budget, workers, False, skip=finished, on_result=on_result)
    restored = [
        _TaskResult(k, True, 0, 0,
                    tuple(canonical_form(MultiplicityVector(n, np.array(c, dtype=np.int64))) for c in v), ())
        for k, v in finished.items()
    ]
    classes = _merge([*pre, *restored, *results])
    if checkpoint is not None:
        save_state(job, {"finished": finished, "nodes": carried_nodes + budget.used}, checkpoint)
    if not complete:
        status = Status.INDETERMINATE
    else:
        status = Status.SAT if classes else Status.UNSAT
    return ClassReport(n, t, index, status, classes,
                       carried_nodes + budget.used + sum(p.nodes for p in pre),
                       budget.elapsed(), method,
                       sum(r.raw for r in (*pre, *results)))


def enumerate_classes(n: int, t: int, index: int, *, pmax: int | None = None,
                      method: str = "auto", budget_seconds: float | None = None,
                      node_budget: int | None = None, workers: int = 1,
                      split_depth: int = 0, checkpoint=None) -> ClassReport:
    """All isomorphism classes of OA(2^t λ, n, 2, t).

    ``method="direct"`` searches the run counts on n columns; ``"extend"``
    builds the chain t, t+1, ..., n column by column; ``"auto"`` picks the
    direct route for n <= 6.
    """
    _check(n, t, index)
    method = _method(method, n, 6)
    if method == "extend":
        chain = classify_chain(n, t, index, pmax=pmax, budget_seconds=budget_seconds,
                               node_budget=node_budget, workers=workers,
                               split_depth=split_depth, checkpoint=checkpoint)
        last = chain[-1]
        if last.factors == n:
            return last
        # an empty level means n columns are empty too
        return dataclasses.replace(last, factors=n, nodes=sum(r.nodes for r in chain),
                                   raw_solutions=sum(r.raw_solutions for r in chain))
    budget = Budget(budget_seconds, node_budget)
    lp_bound = pmax_bound(n, t, index)
    P = lp_bound if pmax is None else min(pmax, lp_bound)
    if P == 0:
        return ClassReport(n, t, index, Status.UNSAT, (), 0, budget.elapsed(), "direct")
    root = _Task(f"d{n}", "direct", n, t, index, P)
    tasks, leaves = _split(root, split_depth)
    job = {"op": "enumerate", "n": n, "t": t, "index": index, "pmax": P, "split": split_depth}
    return _classify_tasks(job, tasks, [leaves], budget, workers, checkpoint, n, t, index, "direct")


def classify_chain(n: int, t: int, index: int, *, start: Sequence | None = None,
                   pmax: int | None = None, budget_seconds: float | None = None,
                   node_budget: int | None = None, workers: int = 1,
                   split_depth: int = 0, checkpoint=None) -> list[ClassReport]:
    """Extend column by column up to n factors, one report per level.

    Starts from ``start`` (class representatives) or from the unique
    array on t columns. Stops early once a level is empty or the budget
    runs out; ``pmax`` only applies to the last level. Checkpoints, if
    requested, go to ``<checkpoint>.<a>`` per level.
    """
    _check(n, t, index)
    budget = Budget(budget_seconds, node_budget)
    reps = list(start) if start is not None else [base_class(t, index)]
    reports: list[ClassReport] = []
    a = (reps[0].counts.n if isinstance(reps[0], CanonicalForm) else reps[0].n)
    while a < n:
        left = None if budget.seconds is None else max(0.0, budget.seconds - budget.elapsed())
        room = budget.node_room()
        rep = extend_classes(reps, t, index, pmax=pmax if a + 1 == n else None,
                             budget_seconds=left, node_budget=room, workers=workers,
                             split_depth=split_depth,
                             checkpoint=None if checkpoint is None else f"{checkpoint}.{a + 1}")
        budget.used += rep.nodes
        reports.append(rep)
        a += 1
        if rep.status is not Status.SAT:
            break
        reps = list(rep.classes)
    return reports


def feasible(n: int, t: int, index: int, pmax: int | None = None, *, method: str = "auto",
             budget_seconds: float | None = None, node_budget: int | None = None,
             workers: int = 1, split_depth: int = 0) -> SolveReport:
    """Decide whether an OA(2^t λ, n, 2, t) with run counts <= pmax exists.

    ``pmax`` defaults to the LP bound; ``"auto"`` searches directly for
    n <= 8 and extends column by column beyond. The direct route stops at the
    first witness; the extension route classifies every level, so an
    UNSAT answer there also says which level ran dry. Witnesses are
    re-verified before they are returned.
    """
    _check(n, t, index)
    params = OAParams.from_index(n, t, index)
    method = _method(method, n, MAX_DIRECT_FACTORS)
    if pmax is not None and pmax < 1:
        raise ParameterError("pmax must be at least 1")
    budget = Budget(budget_seconds, node_budget)
    start = budget.start
    lp_bound = pmax_bound(n, t, index)
    P = lp_bound if pmax is None else min(pmax, lp_bound)
    if P == 0:
        return SolveReport(params, Status.UNSAT, (), 0, budget.elapsed(), 0, method)
    if method == "direct":
        tasks, leaves = _split(_Task(f"d{n}", "direct", n, t, index, P), split_depth)
        if leaves.classes:
            results, complete = [], True
            witnesses = (min(leaves.classes).counts,)
        else:
            results, complete = _execute(tasks, budget, workers, True)
            witnesses = next((r.witnesses[:1] for r in results if r.witnesses), ())
        nodes = budget.used + leaves.nodes
    else:
        left = None if budget_seconds is None else max(0.0, budget_seconds - budget.elapsed())
        reports = classify_chain(n, t, index, pmax=P, budget_seconds=left,
                                 node_budget=node_budget, workers=workers, split_depth=split_depth)
        last = reports[-1]
        complete = last.complete
        witnesses = (last.classes[0].counts,) if last.factors == n and last.classes else ()
        nodes = sum(r.nodes for r in reports)
    for w in witnesses:
        rep = verify_strength(w.array(), t)
        if not (rep.ok and rep.index == index and w.counts.max() <= P):
            raise AssertionError("search produced an invalid witness")
    if witnesses:
        status = Status.SAT
    elif complete:
        status = Status.UNSAT
    else:
        status = Status.INDETERMINATE
    return SolveReport(params, status, tuple(witnesses), nodes, time.monotonic() - start, P, method)
