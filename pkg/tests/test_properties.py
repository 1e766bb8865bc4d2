"""Ideal laws and hierarchy implications over the residue algebra in Z."""

from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import residue_exprs

from subsetcomb import classify as C
from subsetcomb import laws
from subsetcomb.groups import make_group
from subsetcomb.sets import Window, normal_form

Z = make_group("FreeAbelian", {"d": 1})
WIN = Window(4, 100, 3, 50)
THIN_WIN = Window(3, 100, 3, 50)


def exact(name, A):
    o = C.run_classifier(name, A, Z, WIN)
    assert o.exact, (name, o.note)
    return o


@settings(max_examples=150, deadline=None)
@given(residue_exprs, residue_exprs)
def test_non_sparse_chains_survive_union(A, B):
    assert not laws.union_chain_law(A, B, Z, WIN)


@settings(max_examples=100, deadline=None)
@given(residue_exprs, st.integers(-25, 25))
def test_exact_outcomes_are_translation_invariant(A, g):
    assert laws.translation_law(A, Z, WIN, g) == []


@settings(max_examples=100, deadline=None)
@given(residue_exprs, residue_exprs, st.integers(1, 2), st.integers(1, 2))
def test_union_of_thin_levels(A, B, m, n):
    assert not laws.union_thin_law(A, B, Z, m, n, THIN_WIN)


@settings(max_examples=150, deadline=None)
@given(residue_exprs)
def test_hierarchy_on_the_exact_class(A):
    thin, sparse, small = exact("thin", A), exact("sparse", A), exact("small", A)
    thick, large, prethick = exact("thick", A), exact("large", A), exact("prethick", A)
    if thin.holds:
        assert sparse.holds
    if sparse.holds:
        assert small.holds
    if thick.holds or large.holds:
        assert prethick.holds
    assert small.holds == prethick.fails
    assert not small.certificate.get("discrepancy")
    # in Z a residue set is thin exactly when it is finite
    form = normal_form(A, Z)
    assert thin.holds == (not getattr(form, "residues", None))


@settings(max_examples=80, deadline=None)
@given(residue_exprs)
def test_level_and_direct_thinness_agree_exactly(A):
    level = C.thinness_level(A, Z, WIN, 2)
    assert level.exact
    if level.holds and level.value:
        assert not C.n_thin_direct(A, Z, WIN, level.value).fails
    if level.fails:
        assert C.n_thin_direct(A, Z, WIN, 2).fails


def test_random_exact_sets_cover_both_kinds():
    import random

    rng = random.Random(5)
    kinds = {type(laws.random_exact_set(rng)).__name__ for _ in range(50)}
    assert kinds == {"Explicit", "Periodic"}
