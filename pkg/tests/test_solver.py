import numpy as np
import pytest

from binoa.core import BinaryArray, ParameterError, canonical_form, verify_strength
from binoa.lp import delsarte_min_runs
from binoa.solver import (
    Status,
    base_class,
    classify_chain,
    default_workers,
    enumerate_classes,
    extend_classes,
    feasible,
)

from conftest import even_weight


def fourier_classes(lam):
    """Strength 4 on 5 columns leaves only the constant and parity characters.

    So counts are e on even words and o on odd words with e + o = lam;
    complementing one column swaps e and o.
    """
    return {frozenset((e, lam - e)) for e in range(lam + 1)}


def test_feasible_small():
    r = feasible(5, 4, 1)
    assert r.status is Status.SAT and r.conclusive
    w = r.witnesses[0]
    assert verify_strength(w.array(), 4).ok
    assert feasible(6, 4, 1).status is Status.UNSAT


@pytest.mark.parametrize("lam", range(1, 9))
def test_enumerate_5_4_matches_fourier(lam):
    rep = enumerate_classes(5, 4, lam)
    assert rep.status is Status.SAT and len(rep) == len(fourier_classes(lam)) == lam // 2 + 1
    ext = enumerate_classes(5, 4, lam, method="extend")
    assert ext.classes == rep.classes


def test_brute_force_index_one():
    # every fifth column f(x1..x4) over the full factorial
    ff = BinaryArray.full_factorial(4).matrix()
    hits, forms = 0, set()
    for f in range(1 << 16):
        col = (f >> np.arange(16)) & 1
        if col.sum() != 8:
            continue
        m = np.column_stack([ff, col])
        if verify_strength(BinaryArray.from_matrix(m), 4).ok:
            hits += 1
            forms.add(canonical_form(BinaryArray.from_matrix(m)))
    assert hits == 2
    assert len(forms) == 1
    assert set(enumerate_classes(5, 4, 1).classes) == forms


@pytest.mark.parametrize("n,lam", [(5, 6), (5, 7), (6, 6)])
def test_direct_and_extend_agree(n, lam):
    d = enumerate_classes(n, 4, lam, method="direct")
    e = enumerate_classes(n, 4, lam, method="extend")
    assert d.complete and e.complete
    assert d.classes == e.classes
    for cf in d.classes:
        assert verify_strength(cf.array(), 4).ok
        assert canonical_form(cf.counts) == cf


def test_direct_6_4_6_count():
    assert len(enumerate_classes(6, 4, 6, method="direct")) == 9


def test_workers_and_split_do_not_change_results():
    one = enumerate_classes(6, 4, 6, method="direct")
    two = enumerate_classes(6, 4, 6, method="direct", workers=2, split_depth=3)
    assert one.classes == two.classes
    five = enumerate_classes(5, 4, 6)
    rep = extend_classes(five.classes, 4, 6, workers=2, split_depth=2)
    assert rep.classes == extend_classes(five.classes, 4, 6).classes
    f1 = feasible(7, 4, 6, method="direct")
    f2 = feasible(7, 4, 6, method="direct", workers=2, split_depth=2)
    assert f1.status is f2.status is Status.SAT
    assert f1.witnesses == f2.witnesses


def test_budget_gives_indeterminate_not_unsat():
    r = feasible(8, 4, 6, method="direct", node_budget=1)
    assert r.status is Status.INDETERMINATE and not r.conclusive
    c = enumerate_classes(6, 4, 6, method="direct", node_budget=1)
    assert c.status is Status.INDETERMINATE and not c.complete
    chain = classify_chain(7, 4, 6, node_budget=5)
    assert chain[-1].status is Status.INDETERMINATE


def test_extension_of_16_runs_is_empty():
    rep = extend_classes([even_weight(5)], 4, 1)
    assert rep.status is Status.UNSAT and len(rep) == 0
    # consistent with the LP bound on 6 columns
    assert delsarte_min_runs(6, 4).lp_value > 16


def test_witness_respects_pmax():
    # a simple OA(96, 7, 2, 4) would leave an OA(32, 7, 2, 4) as its complement
    assert delsarte_min_runs(7, 4).lp_value > 32
    for method in ("direct", "extend"):
        assert feasible(7, 4, 6, pmax=1, method=method).status is Status.UNSAT
    r = feasible(6, 4, 6, pmax=2)
    assert r.status is Status.SAT
    w = r.witnesses[0]
    assert w.counts.max() <= 2 and r.pmax <= 2
    assert feasible(6, 4, 6, pmax=2).witnesses == r.witnesses


def test_base_class_and_errors():
    b = base_class(3, 2)
    assert b.N == 16 and (b.counts.counts == 2).all()
    with pytest.raises(ParameterError):
        extend_classes([even_weight(5)], 4, 2)
    with pytest.raises(ParameterError):
        extend_classes([], 4, 1)
    with pytest.raises(ParameterError):
        feasible(4, 4, 1)
    with pytest.raises(ParameterError):
        feasible(5, 4, 1, pmax=0)


def test_default_workers(monkeypatch):
    monkeypatch.setenv("BINOA_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("BINOA_WORKERS")
    assert default_workers() == 1
