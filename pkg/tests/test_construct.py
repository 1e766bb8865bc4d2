import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subsetcomb import bigbits
from subsetcomb import construct as K
from subsetcomb.errors import ConfigError, UsageError
from subsetcomb.groups import ball, make_group, support
from subsetcomb.sets import Cell, Window, contains, members

Z = make_group("FreeAbelian", {"d": 1})
F2 = make_group("FreeGroup", {"k": 2})
Z2 = make_group("FreeAbelian", {"d": 2})
SUM6 = make_group("RestrictedDirectSum", {"components": ["Z"] * 6})


def _pair_blocks(G, a, b):
    return {(i, j): {G.op(G.op(f, a[i]), b[j]) for f in ball(G, i)}
            for j in range(len(b)) for i in range(j + 1)}


@pytest.mark.parametrize("G,count", [(Z, 3), (Z, 6), (Z2, 4), (F2, 2)], ids=["Z3", "Z6", "Z2-4", "F2-2"])
def test_pair_product_blocks_are_disjoint(G, count):
    w = K.build_pair_product(G, count)
    assert w.a[0] == w.b[0] == G.identity
    blocks = _pair_blocks(G, w.a, w.b)
    for (k1, s1), (k2, s2) in itertools.combinations(blocks.items(), 2):
        assert not s1 & s2, (k1, k2)
    fb = [{G.op(f, w.b[n]) for f in ball(G, n)} for n in range(count)]
    for s1, s2 in itertools.combinations(fb, 2):
        assert not s1 & s2
    assert all(t["result"] for t in w.transcript)


def test_pair_product_degenerate_count():
    w = K.build_pair_product(Z, 1)
    assert w.elements() == [0] and w.transcript == []
    with pytest.raises(ConfigError):
        K.build_pair_product(Z, 0)


def test_pair_product_inclusions_and_tails():
    w = K.build_pair_product(Z, 6)
    assert not K.check_pair_inclusions(w)["failures"]
    res = K.check_pair_tails(w, 3)
    assert res["checked"] > 0 and not res["violations"]
    # independent tail check straight from the definition
    A = set(w.elements())
    for g in range(-3, 4):
        if g:
            tail = {w.a[i] + w.b[j] for j in range(6) for i in range(abs(g) + 1, j + 1)}
            assert not {g + x for x in tail} & A


def test_pair_product_members_match_the_expression():
    w = K.build_pair_product(Z, 5)
    H = abs(w.b[4])
    listed = set(w.elements())
    assert {x for x in listed if abs(x) <= H} <= set(members(w.expr, Z, H))


def test_fp_small_has_all_finite_sums():
    w = K.build_fp_small(Z, 5)
    terms = w.a[1:6]
    sums = {sum(c) for r in range(1, 6) for c in itertools.combinations(terms, r)}
    assert len(sums) == 31
    assert set(w.elements()) == sums


@pytest.mark.parametrize("G,count", [(Z, 5), (F2, 3)], ids=["Z", "F2"])
def test_fp_small_condition_on_prefix(G, count):
    w = K.build_fp_small(G, count)
    P = {G.identity}
    for t in w.a[1: count + 1]:
        P |= {G.op(p, t) for p in P}
    for k in range(count + 1):
        left = {G.op(w.b[k], p) for p in P}
        right = {G.op(f, p) for f in ball(G, k) for p in P}
        assert not left & right, k
    assert len(w.transcript) == sum(m + 2 for m in range(count))


def test_support_codes():
    g = (0, 3, 0, -1, 0, 0)
    assert K.support_code(SUM6, g) == (2, 5, 2)
    assert K.support_code(SUM6, (1, 0, 0, 0, 0, 0)) == (1, 1)
    for z in range(-20, 21):
        if z:
            code = K.encode_coordinate(0, z)
            assert code == (2 * z - 1 if z > 0 else -2 * z)
            assert K.decode_coordinate(0, code) == z


def test_support_code_partition_is_exact():
    P = K.build_support_partition(SUM6, 3)
    res = P.check_partition()
    assert res["ok"]
    for s, elems in P.cells.items():
        for x in elems:
            assert len(support(SUM6, x)) == s[0]
            assert contains(Cell(s), SUM6, x)
    assert P.identity_remainder == SUM6.identity
    with pytest.raises(UsageError):
        K.build_support_partition(Z, 3)


def test_support_code_isolation():
    P = K.build_support_partition(SUM6, 3)
    res = K.check_support_isolation(P, (1, 1), Window(2, 3, 1, 0))
    assert res["checked"] > 0 and not res["violations"]
    with pytest.raises(UsageError):
        K.check_support_isolation(P, (9, 9), Window(2, 3, 1, 0))


def test_star_sequence_nesting_and_disjointness():
    S = K.build_nested_classes(8)
    assert not S.violations
    ints = [a for a in S.terms if isinstance(a, int)]
    assert ints[:4] == [1, 3, 11, 2059]
    for x, y in zip(ints, ints[1:]):
        assert x < y and (y - x) % (1 << x) == 0
    # direct residue arithmetic on the instances small enough to compute
    for t in S.transcript:
        n, N, i = t["n"], t["N"], t["i"]
        if N < len(ints) and ints[n] <= 4096:
            an, aN = ints[n], ints[N]
            assert ((an - (i + aN)) % (1 << an) != 0) == t["result"]
    with pytest.raises(ConfigError):
        K.build_nested_classes(1)


def test_star_sequence_prefix_is_stable():
    short, long = K.build_nested_classes(5), K.build_nested_classes(7)
    assert long.terms[:5] == short.terms
    assert long.transcript[: len(short.transcript)] == short.transcript


def _to_int(v):
    return v if isinstance(v, int) else sum(1 << _to_int(e) for e in v.exps)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(1, 9), st.integers(0, 40))
def test_bigbits_arithmetic_against_ints(x, y, t, e):
    saved = bigbits.LIMIT
    bigbits.LIMIT = 4
    try:
        X, Y = bigbits.from_int(x), bigbits.from_int(y)
        assert _to_int(X) == x
        assert _to_int(bigbits.add(X, Y)) == x + y
        assert bigbits.cmp(X, Y) == (x > y) - (x < y)
        assert _to_int(bigbits.add_pow2(X, e)) == x + (1 << e)
        assert _to_int(bigbits.shift_mul(t, e)) == t << e
        if x:
            assert _to_int(bigbits.v2(X)) == (x & -x).bit_length() - 1
        assert _to_int(bigbits.from_json(bigbits.to_json(X))) == x
    finally:
        bigbits.LIMIT = saved


def test_oversized_candidate_search_is_a_resource_error():
    from subsetcomb.errors import ResourceError

    with pytest.raises(ResourceError):
        K.build_pair_product(F2, 3)
