import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binoa.bounds import (
    BoundFact,
    InconsistencyError,
    KnowledgeBase,
    _inputs,
    nr_truncations,
    omega_table,
    propagate,
    standard_knowledge_base,
    table_rows,
)
from binoa.core import BinaryArray, ParameterError

from conftest import even_weight

INPUT_RULES = {"Delsarte LP", "asserted", "construction", "exhaustive search"}


@pytest.fixture(scope="module")
def kb():
    return propagate(standard_knowledge_base())


def snapshot(kb):
    return {k: (f.value, f.rule) for k, f in kb.bounds.items()}, set(kb.exclusions)


def test_known_values(kb):
    assert kb.exact("F", 11, 4).value == 128
    for n in range(11, 16):
        assert kb.exact("omega", n, 4).value == 128
    for n in range(12, 17):
        assert kb.exact("omega", n, 5).value == 256
    st_ = kb.status("omega", 11, 5)
    assert st_ == {"quantity": "omega", "n": 11, "t": 5, "lower": 192, "upper": 256, "closed": False}


def test_search_exclusions_close_11_5():
    extra = ((96, 8, 4, "exhaustive search", ""), (112, 7, 4, "exhaustive search", ""))
    kb = propagate(standard_knowledge_base(exclusions=((96, 11, 4), (112, 11, 4)) + extra))
    assert kb.exact("omega", 11, 5).value == 256
    assert kb.exact("omega", 10, 4).value == 128
    # the stated exclusions are now implied, so the values do not change without them
    kb2 = propagate(standard_knowledge_base(exclusions=extra))
    assert {k: f.value for k, f in kb2.bounds.items()} == {k: f.value for k, f in kb.bounds.items()}


def test_idempotent(kb):
    again = propagate(kb)
    assert snapshot(again) == snapshot(kb)


def test_derivations_reach_inputs(kb):
    for n in range(11, 16):
        f = kb.exact("omega", n, 4)
        assert {x.rule for x in _inputs(f)} <= INPUT_RULES
        text = f.explain()
        assert text.splitlines()[-1].startswith("[") and f"ω({n},4) = 128" in text
    for f in kb.facts():
        if f.quantity == "omega" and f.relation == "<=":
            assert f.witness is not None
            assert f.witness.N == f.value


def test_structural_laws(kb):
    for t in (4, 5):
        lows = [kb.interval("F", n, t)[0] for n in range(t + 1, 17)]
        assert lows == sorted(lows)
        for n in range(t + 1, 17):
            lo, hi = kb.interval("omega", n, t)
            flo, _ = kb.interval("F", n, t)
            assert flo <= lo and lo % (1 << t) == 0
            if hi is not None:
                assert lo <= hi


def test_table_text_and_rows(kb):
    text = omega_table(kb)
    assert " 11         128   [192,256]" in text
    assert "ω(12,4): >= 128" in text
    rows = {(r["n"], r["t"]): r for r in table_rows(kb)}
    assert rows[(13, 5)]["exact"] and rows[(13, 5)]["upper"] == 256
    assert not rows[(11, 5)]["exact"]


def test_inconsistency_names_both_chains(kb):
    bad = kb.copy()
    with pytest.raises(InconsistencyError) as e:
        bad.offer(BoundFact("F", 16, 5, ">=", 512, "asserted"))
        propagate(bad)
    msg = str(e.value)
    assert "lower bound:" in msg and "upper bound:" in msg and "construction" in msg
    with pytest.raises(InconsistencyError):
        propagate(standard_knowledge_base().add_exclusion(256, 16, 5))


def test_witness_is_verified():
    with pytest.raises(ParameterError):
        BoundFact("omega", 5, 4, "<=", 16, "construction", witness=BinaryArray(5, range(16)))
    ok = BoundFact("omega", 5, 4, "<=", 16, "construction", witness=even_weight(5))
    assert ok.label() == "ω(5,4) <= 16"
    with pytest.raises(ParameterError):
        BoundFact("omega", 5, 4, "=", 16, "x")
    with pytest.raises(ParameterError):
        standard_knowledge_base(delsarte=False, constructions=False).add_exclusion(100, 11, 4)


def test_nr_truncations_are_witnesses():
    for a in nr_truncations():
        BoundFact("omega", a.n, 5, "<=", 256, "construction", witness=a)


SEARCH = (96, 8, 4, "exhaustive search", "")
EXCL = [(96, 11, 4), (112, 11, 4), SEARCH]
POINTS = [(n, t) for t in (4, 5) for n in range(t + 1, 17)]


@settings(max_examples=15)
@given(st.sets(st.sampled_from(POINTS)), st.sets(st.sampled_from(range(3))), st.booleans(),
       st.data())
def test_monotone_in_inputs(pts, excl, cons, data):
    more_pts = pts | data.draw(st.sets(st.sampled_from(POINTS)))
    more_excl = excl | data.draw(st.sets(st.sampled_from(range(3))))
    more_cons = cons or data.draw(st.booleans())
    small = propagate(standard_knowledge_base(delsarte=sorted(pts), exclusions=[EXCL[i] for i in excl],
                                              constructions=cons))
    big = propagate(standard_knowledge_base(delsarte=sorted(more_pts),
                                            exclusions=[EXCL[i] for i in more_excl],
                                            constructions=more_cons))
    for q in ("F", "omega"):
        for n, t in POINTS:
            lo, hi = small.interval(q, n, t)
            blo, bhi = big.interval(q, n, t)
            assert blo >= lo
            if hi is not None:
                assert bhi is not None and bhi <= hi
    assert snapshot(propagate(small)) == snapshot(small)


def test_grid_checks():
    kb = KnowledgeBase(4, 5, 12)
    assert kb.on_grid(11, 5) and not kb.on_grid(5, 5) and not kb.on_grid(13, 4)
    assert not kb.offer(BoundFact("F", 13, 4, ">=", 16, "x"))
