import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subsetcomb import construct as K
from subsetcomb import density as Dn
from subsetcomb.errors import UsageError
from subsetcomb.groups import make_group
from subsetcomb.sets import RightTranslate, Whole, Window, explicit, periodic, seq

Z = make_group("FreeAbelian", {"d": 1})
Z2 = make_group("FreeAbelian", {"d": 2})
F2 = make_group("FreeGroup", {"k": 2})
EVENS = periodic(2, [0])


def test_sigma_examples():
    est = Dn.sigma_R(EVENS, Z, Dn.intervals(8))
    assert est.value == Fraction(1, 2) and est.optimizer["F"] == [0, 1] and est.exact_sup
    assert Dn.sigma_R(Whole(), Z, Dn.intervals(5)).value == 1
    est = Dn.sigma_R(seq("pow", base=2), Z, [list(range(64))], g_radius=2 ** 12)
    assert est.value == Fraction(7, 64)
    assert not est.exact_sup and est.direction == "upperBound"


def test_powers_of_two_window_oracle():
    powers = {2 ** k for k in range(14)}
    best = max(sum(1 for x in range(64) if x - g in powers) for g in range(-2 ** 12, 2 ** 12 + 1))
    assert best == 7


def test_sigma_left_and_right_agree_on_abelian_sets():
    for A in (EVENS, periodic(3, [0, 1]), seq("pow", base=3)):
        fam = Dn.intervals(6)
        assert Dn.sigma_R(A, Z, fam).value == Dn.sigma_L(A, Z, fam).value


def test_sigma_on_free_group_balls():
    est = Dn.sigma_R(Whole(), F2, Dn.balls(F2, 2), g_radius=2)
    assert est.value == 1
    A = explicit(F2.parse("a"), F2.parse("ab"))
    assert Dn.sigma_L(A, F2, Dn.balls(F2, 2), g_radius=3).value <= Fraction(2, 17)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.lists(st.integers(0, 5), max_size=5), st.integers(1, 10))
def test_bound_sequence_is_non_increasing(m, res, L):
    A = periodic(m, [r % m for r in res])
    bounds = Dn.bound_sequence(A, Z, Dn.intervals(L))
    assert all(x >= y for x, y in zip(bounds, bounds[1:]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=6), st.integers(1, 12))
def test_finite_sets_are_bounded_by_their_size(xs, L):
    A = explicit(*xs)
    fam = Dn.intervals(L)
    assert Dn.sigma_R(A, Z, fam, g_radius=64).value <= Fraction(len(set(xs)), L)


def test_sigma_errors():
    with pytest.raises(UsageError):
        Dn.sigma_R(EVENS, Z, [])
    with pytest.raises(UsageError):
        Dn.sigma_R(EVENS, Z, [[]])
    with pytest.raises(UsageError):
        Dn.sigma_R(EVENS, Z, [[0]], g_radius=0)
    with pytest.raises(UsageError):
        Dn.family_from_json({"intervals": 3}, F2)


def test_family_specs():
    assert Dn.family_from_json({"interval": 3}, Z) == [[0, 1, 2]]
    assert len(Dn.family_from_json({"balls": 2}, Z2)) == 3
    assert Dn.family_from_json({"sets": [[[0, 1], [1, 0]]]}, Z2) == [[(0, 1), (1, 0)]]


def test_folner_examples():
    for est, n in zip(Dn.folner_density(EVENS, Z, [10, 100, 1000]), [10, 100, 1000]):
        assert abs(est.value - Fraction(1, 2)) <= Fraction(1, n)
        assert "empirical" in est.label
    vals = [e.value for e in Dn.folner_density(explicit(1, 5, 9), Z, [10, 100, 1000])]
    assert vals[0] > vals[1] > vals[2]


def test_folner_of_a_nested_class():
    S = K.build_nested_classes(3)
    a1 = S.terms[1]
    cls = periodic(2 ** a1, [a1])
    est = Dn.folner_density(cls, Z, [10 ** 6])[0]
    assert abs(est.value - Fraction(1, 2 ** a1)) <= Fraction(1, 10 ** 6)


def test_folner_on_the_plane_matches_counting():
    A = seq("pow", base=2, axis=0)
    est = Dn.folner_density(A, Z2, [8])[0]
    assert est.value == Fraction(4, 17 ** 2)
    with pytest.raises(UsageError):
        Dn.folner_density(EVENS, F2, [3])


def test_residue_counting_matches_enumeration():
    P = periodic(7, [0, 3], [1, 2], [14])
    for lo, hi in [(-30, 30), (5, 6), (-100, -1)]:
        assert Dn._count_residues(P, lo, hi) == sum(1 for x in range(lo, hi + 1) if P.has(x))


def test_derivation_examples():
    D = Dn.derivation(EVENS, Z, Window(8, 64, 1))
    assert sorted(D.members) == list(range(-8, 9, 2)) and D.exact
    D = Dn.derivation(seq("pow", base=2), Z, Window(8, 2 ** 20, 1))
    assert D.members == [0]
    blocks = seq("factorial_blocks")
    D = Dn.derivation(blocks, Z, Window(6, math.factorial(12) + 12, 1))
    assert sorted(D.members) == list(range(-6, 7))


def test_derivation_symmetry_and_right_translation():
    for A in (EVENS, periodic(6, [0, 1, 3]), periodic(5, [2], [0], [7])):
        D = Dn.derivation(A, Z, Window(8, 64, 1))
        assert Dn.is_symmetric(D, Z)
        Dr = Dn.derivation(RightTranslate(A, 3), Z, Window(8, 64, 1))
        assert sorted(Dr.members) == sorted(D.members)
        assert all(c["tag"] == "ExactInfinite" for c in D.certificates.values())
