import pytest
from hypothesis import given, settings
from strategies import brute_has, residue_exprs, small_ints

from subsetcomb.errors import ConfigError, UsageError
from subsetcomb.groups import make_group
from subsetcomb.sets import (
    EXACT_FINITE,
    EXACT_INFINITE,
    WINDOW_FINITE,
    WINDOW_INFINITE,
    Intersect,
    LeftTranslate,
    Window,
    contains,
    expr_from_json,
    explicit,
    finiteness,
    fp,
    intersect,
    members,
    normal_form,
    periodic,
    seq,
    translate,
    union,
)

Z = make_group("FreeAbelian", {"d": 1})
F2 = make_group("FreeGroup", {"k": 2})
Z2 = make_group("FreeAbelian", {"d": 2})
EXTENT = 10_000


def test_members_examples():
    assert members(periodic(2, [0]), Z, 4) == [0, -2, 2, -4, 4]
    assert sorted(members(seq("pow", base=2), Z, 16)) == [1, 2, 4, 8, 16]
    assert sorted(members(fp("pow", base=10), Z, 110)) == [1, 10, 11, 100, 101, 110]


def test_finiteness_examples():
    evens = periodic(2, [0])
    v = finiteness(Intersect((evens, LeftTranslate(1, evens))), Z, Window())
    assert v.tag == EXACT_FINITE and v.value == 0
    v = finiteness(Intersect((evens, LeftTranslate(2, evens))), Z, Window())
    assert v.tag == EXACT_INFINITE
    p = seq("pow", base=2)
    v = finiteness(Intersect((p, LeftTranslate(1, p))), Z, Window(8, 2 ** 20, 1))
    assert v.tag == WINDOW_FINITE and v.certificate["members"] == [2]


def test_algebra_examples():
    assert translate(periodic(4, [1]), 2, "left") == periodic(4, [3])
    assert intersect(periodic(4, [1]), periodic(6, [1])) == periodic(12, [1])
    assert union(explicit(1), explicit(2)) == explicit(1, 2)


def test_powers_of_two_minus_shift_by_brute_force():
    # 2^a = 2^b + 1 only for (a, b) = (1, 0)
    pw = {2 ** k for k in range(21)}
    assert sorted(x for x in pw if x - 1 in pw) == [2]


@settings(max_examples=150, deadline=None)
@given(residue_exprs)
def test_exact_verdicts_match_brute_force(A):
    v = finiteness(A, Z, Window(4, 64, 2))
    assert v.exact
    inside = [x for x in range(-EXTENT, EXTENT + 1) if brute_has(A, x)]
    if v.tag == EXACT_FINITE:
        assert len(inside) == v.value
    else:
        assert any(abs(x) > EXTENT // 2 for x in inside)
    assert members(A, Z, 50) == Z.sorted(x for x in inside if abs(x) <= 50)


@settings(max_examples=60, deadline=None)
@given(residue_exprs, small_ints)
def test_normal_form_is_a_faithful_rewrite(A, x):
    form = normal_form(A, Z)
    assert form is not None
    for y in range(x - 40, x + 41):
        assert contains(form, Z, y) == brute_has(A, y)


SYMBOLIC = [
    (Z, seq("pow", base=3)),
    (Z, union(seq("poly", power=2), LeftTranslate(5, seq("pow", base=2)))),
    (Z, fp("pow", base=4)),
    (F2, seq("pow", base=2)),
    (F2, explicit(F2.parse("ab"), F2.parse("BA"), F2.parse("a"))),
    (Z2, seq("pow", base=2, axis=1)),
]


@pytest.mark.parametrize("G,A", SYMBOLIC)
def test_horizon_monotonicity(G, A):
    prev = set()
    for H in range(0, 24, 3):
        cur = set(members(A, G, H))
        assert prev <= cur
        assert all(G.length(x) <= H for x in cur)
        prev = cur


@pytest.mark.parametrize("G,A", SYMBOLIC)
def test_translate_coherence(G, A):
    H = 12
    for g in [x for x in members(explicit(*_some(G)), G, 3)]:
        left = set(members(translate(A, g, "left"), G, H))
        expected = {G.op(g, x) for x in members(A, G, H + G.length(g))}
        assert left == {y for y in expected if G.length(y) <= H}


def _some(G):
    if G is Z:
        return [-2, 1, 3]
    if G is F2:
        return [F2.parse("a"), F2.parse("Ab"), F2.parse("bb")]
    return [(1, 0), (0, -2)]


def test_stability_rule_reads_only_the_top_band():
    p = seq("pow", base=2)
    assert finiteness(p, Z, Window(2, 64, 1, 16)).tag == WINDOW_INFINITE
    # no power of two in (40, 60] while 64 is beyond the horizon
    assert finiteness(p, Z, Window(2, 60, 1, 20)).tag == WINDOW_FINITE


def test_json_round_trip():
    for G, A in SYMBOLIC:
        assert expr_from_json(A.to_json(G), G) == A
    P = periodic(6, [1, 3], [0], [7])
    assert expr_from_json(P.to_json(Z), Z) == P


def test_usage_errors():
    with pytest.raises(UsageError):
        translate(explicit((0, 1)), (1, 1), "up")
    with pytest.raises(UsageError):
        expr_from_json({"periodic": {"modulus": 2, "residues": [0]}}, F2)
    with pytest.raises(ConfigError):
        periodic(0, [0])
    with pytest.raises(ConfigError):
        Window(R=0)
    with pytest.raises(ConfigError):
        members(explicit(1), Z, -1)
