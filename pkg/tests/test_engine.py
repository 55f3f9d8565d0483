import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from binoa.core import IsoOp
from binoa.engine import Search
from binoa.model import build_constraints


def system(n, t, lam):
    cs = build_constraints(n, t, lam)
    return [r.support for r in cs.rows], cs.rhs


def brute(rows, rhs, hi, V):
    grid = np.array(list(itertools.product(*[range(h, -1, -1) for h in hi])), dtype=np.int64)
    ok = np.ones(len(grid), dtype=bool)
    for r, b in zip(rows, rhs):
        ok &= grid[:, r].sum(axis=1) == b
    return {tuple(x) for x in grid[ok]}


def collect(search, chunk=None):
    out = []
    if chunk is None:
        for _, sols, _ in search.run():
            out.extend(map(tuple, sols))
    else:
        while not search.done:
            _, sols, _ = search.step(chunk)
            out.extend(map(tuple, sols))
    return out


@pytest.mark.parametrize("n,t,lam,h", [(4, 2, 1, 1), (3, 1, 2, 2), (3, 2, 2, 2), (4, 3, 1, 1)])
def test_enumeration_matches_brute_force(n, t, lam, h):
    rows, rhs = system(n, t, lam)
    V = 1 << n
    hi = [h] * V
    expect = brute(rows, rhs, hi, V)
    for ff in (True, False):
        got = collect(Search(rows, rhs, [0] * V, hi, first_fail=ff))
        assert len(got) == len(set(got))
        assert set(got) == expect


def test_stepping_matches_one_shot():
    rows, rhs = system(4, 2, 1)
    one = collect(Search(rows, rhs, [0] * 16, [1] * 16))
    for chunk in (1, 3, 17):
        assert collect(Search(rows, rhs, [0] * 16, [1] * 16), chunk) == one


@given(st.permutations(range(16)))
def test_order_does_not_change_solution_set(order):
    rows, rhs = system(4, 2, 1)
    base = set(collect(Search(rows, rhs, [0] * 16, [1] * 16)))
    assert set(collect(Search(rows, rhs, [0] * 16, [1] * 16, order=order, first_fail=False))) == base


def test_pairs_and_empty_domain():
    # x0 + x1 = 2 with x1 <= x0 over {0..2}
    s = Search([np.array([0, 1])], [2], [0, 0], [2, 2], pairs=[(0, 1)])
    assert set(collect(s)) == {(2, 0), (1, 1)}
    s = Search([np.array([0])], [1], [2], [1])
    assert s.done and collect(s) == []


def symmetry_tables(ops):
    src = np.array([np.argsort(op.table()) for op in ops], dtype=np.int64)
    return src


def lex_leaders(sols, ops, comp_flags, cval):
    keep = set()
    for s in sols:
        x = np.array(s)
        ok = True
        for op, c in zip(ops, comp_flags):
            img = np.empty_like(x)
            img[op.table()] = x
            if c:
                img = cval - img
            if tuple(img) < s:
                ok = False
                break
        if ok:
            keep.add(s)
    return keep


@pytest.mark.parametrize("subset", [None, 12])
def test_lex_leader_pruning(subset):
    n = 4
    rows, rhs = system(n, 2, 1)
    V = 1 << n
    ops = [IsoOp(p, m) for p in itertools.permutations(range(n)) for m in range(1 << n)]
    if subset:
        rng = np.random.default_rng(1)
        ops = [ops[i] for i in rng.choice(len(ops), subset, replace=False)]
    comp = np.zeros(len(ops), dtype=bool)
    src = symmetry_tables(ops)
    every = brute(rows, rhs, [1] * V, V)
    got = collect(Search(rows, rhs, [0] * V, [1] * V, first_fail=False, symmetries=(src, comp)))
    assert set(got) == lex_leaders(every, ops, comp, None)
    if subset is None:
        # with the full group exactly one solution per orbit survives
        orbits = {min(tuple(np.bincount(op.table()[np.flatnonzero(s)], minlength=V)) for op in ops)
                  for s in map(np.array, every)}
        assert len(got) == len(orbits)


def test_complement_filter():
    # the filter keeps x iff x <= cval - x in lex order
    rows, rhs = system(3, 1, 2)
    V = 8
    hi = np.array([2] * V)
    every = brute(rows, rhs, list(hi), V)
    got = set(collect(Search(rows, rhs, [0] * V, hi, first_fail=False,
                             symmetries=(np.arange(V)[None, :], np.array([True])), complement=hi)))
    assert got == lex_leaders(every, [IsoOp.identity(3)], [True], hi)
    assert got < every
