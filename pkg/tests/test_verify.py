import copy

from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import brute_has, residue_exprs

from subsetcomb import classify as C
from subsetcomb import construct as K
from subsetcomb import verify as V
from subsetcomb.groups import make_group
from subsetcomb.sets import Window, finiteness, periodic, seq

Z = make_group("FreeAbelian", {"d": 1})
SUM4 = make_group("RestrictedDirectSum", {"components": ["Z"] * 4})


@settings(max_examples=100, deadline=None)
@given(residue_exprs, st.integers(1, 12), st.integers(0, 11))
def test_eventual_matches_brute_force(A, m, r):
    r %= m
    v = V.eventual(A, m, r)
    far = [r + m * t for t in range(1000, 1100)] + [r - m * t for t in range(1000, 1100)]
    hits = [brute_has(A, x) for x in far]
    if v is True:
        assert all(hits)
    elif v is False:
        assert not any(hits)


@settings(max_examples=100, deadline=None)
@given(residue_exprs)
def test_residue_evaluator_agrees_with_the_normalizer(A):
    assert V.residue_infinite(A, Z) == finiteness(A, Z, Window(4, 64, 2)).infinite


def _record(A, out, **params):
    return {"group": Z.descriptor(), "expr": A.to_json(Z), "outcome": out.to_json(), "params": params}


def test_tampered_certificates_are_rejected():
    A = periodic(3, [0])
    w = Window(6, 256, 3)
    rec = _record(A, C.is_sparse(A, Z, w))
    assert V.replay_outcome(rec) == []
    bad = copy.deepcopy(rec)
    bad["outcome"]["certificate"]["chain"] = [0, 1, 2]
    assert V.replay_outcome(bad)
    bad = copy.deepcopy(rec)
    bad["outcome"]["polarity"] = "holds"
    assert V.replay_outcome(bad)


def test_tampered_fp_obstruction_is_rejected():
    w = K.build_fp_small(Z, 5)
    win = Window(8, sum(abs(x) for x in w.a[1:6]), 4)
    rec = _record(w.expr, C.disparse_proxy(w.expr, Z, win))
    assert V.replay_outcome(rec) == []
    rec["outcome"]["certificate"]["a"][0] -= 1
    assert V.replay_outcome(rec)


def test_windowed_scan_is_replayed_by_recomputation():
    A = seq("pow", base=2)
    rec = _record(A, C.n_thin_direct(A, Z, Window(4, 1024, 2), 1), n=1)
    assert V.replay_outcome(rec) == []
    rec["outcome"]["certificate"]["h"] += 1
    assert V.replay_outcome(rec)


def test_construction_witnesses_replay():
    for w in (K.build_pair_product(Z, 5), K.build_fp_small(Z, 4)):
        obj = w.to_json()
        assert V.verify_witness(obj) == []
        bad = copy.deepcopy(obj)
        bad["b"][2] += 1
        assert V.verify_witness(bad)


def test_support_code_witness_replay():
    P = K.build_support_partition(SUM4, 3)
    obj = P.to_json()
    assert V.verify_support_partition(obj) == []
    bad = copy.deepcopy(obj)
    bad["cells"][0]["members"].append(bad["cells"][1]["members"][0])
    assert V.verify_support_partition(bad)
    bad = copy.deepcopy(obj)
    bad["cells"][-1]["members"].pop()
    assert V.verify_support_partition(bad)


def test_nested_classes_witness_replay():
    obj = K.build_nested_classes(6).to_json()
    assert V.verify_nested_classes(obj) == []
    bad = copy.deepcopy(obj)
    bad["transcript"][3]["result"] = False
    assert V.verify_nested_classes(bad)


def test_malformed_records_fail_instead_of_crashing():
    recs = [{"type": "outcome", "id": "x", "group": Z.descriptor(), "expr": {"bogus": 1},
             "outcome": {}}, {"type": "config"}]
    fails = V.verify_lines(recs)
    assert list(fails) == ["x"] and "raised" in fails["x"][0]
    assert V.verify_witness({"kind": "mystery"}) == ["unknown witness kind"]
