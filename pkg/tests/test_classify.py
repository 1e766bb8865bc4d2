import math

import pytest

from subsetcomb import classify as C
from subsetcomb import construct as K
from subsetcomb.errors import ResourceError
from subsetcomb.groups import make_group
from subsetcomb.sets import Cell, LeftTranslate, Whole, Window, explicit, fp, periodic, seq, union
from subsetcomb.verify import replay_outcome

Z = make_group("FreeAbelian", {"d": 1})
F2 = make_group("FreeGroup", {"k": 2})
EVENS = periodic(2, [0])
POW2 = seq("pow", base=2)
WIDE = Window(8, 2 ** 20, 4)
MID = Window(8, 2 ** 12, 4)


def replays(A, G, out):
    return replay_outcome({"group": G.descriptor(), "expr": A.to_json(G), "outcome": out.to_json()}) == []


def test_thin_examples():
    o = C.is_thin(EVENS, Z, WIDE)
    assert o.fails and o.exact and o.certificate["g"] == 2
    o = C.is_thin(POW2, Z, WIDE)
    assert o.holds and not o.exact
    o = C.is_thin(explicit(0, 5, 7), Z, WIDE)
    assert o.holds and o.exact


def test_thinness_level_examples():
    shifted = union(POW2, LeftTranslate(1, POW2))
    assert C.thinness_level(shifted, Z, MID, 3).value == 2
    for nmax in (1, 2, 3):
        o = C.thinness_level(EVENS, Z, WIDE, nmax)
        assert o.fails and o.exact
    o = C.thinness_level(explicit(3), Z, WIDE, 3)
    assert o.holds and o.value == 0


def test_level_brute_force_oracle_for_shifted_powers():
    # pairwise: x - y = 1 and both in A infinitely often; triples: no three translates share infinitely many
    powers = [2 ** k for k in range(40)]
    A = set(powers) | {p + 1 for p in powers}
    assert sum(1 for p in powers[2:] if p in A and p + 1 in A) == len(powers) - 2
    triples = [x for x in range(3, 2 ** 20) if all(x + d in A for d in (0, 1, 2))]
    assert len(triples) <= 2


def test_n_thin_direct_examples():
    o = C.n_thin_direct(POW2, Z, WIDE, 1)
    assert o.holds and o.certificate["h"] <= 3 * WIDE.R
    o = C.n_thin_direct(EVENS, Z, WIDE, 1)
    assert o.fails and o.exact and o.certificate["F"] == [0, 2]
    o = C.n_thin_direct(explicit(1, 4), Z, WIDE, 2)
    assert o.holds and o.exact
    with pytest.raises(ValueError):
        C.n_thin_direct(POW2, Z, WIDE, 0)


def test_n_thin_level_one_on_free_group_powers():
    # a^6 is hit twice from ball(2) but only finitely often; the wider member scan sees past it
    A = seq("pow", base=2)
    assert C.n_thin_direct(A, F2, Window(2, 16, 3, 8, 16), 1).holds


def test_sparse_examples():
    o = C.is_sparse(EVENS, Z, WIDE)
    assert o.fails and o.exact and o.certificate["chain"] == [0, 2, 4, 6]
    o = C.is_sparse(POW2, Z, WIDE)
    assert o.holds and o.certificate["depth"] == 4
    w = K.build_pair_product(Z, 6)
    o = C.is_sparse(w.expr, Z, Window(24, 952, 4))
    assert o.fails
    assert o.certificate["chain"] == K.pair_product_chain(w, 4)
    assert replays(w.expr, Z, o)


def test_thick_examples():
    assert C.is_thick(Whole(), Z, WIDE).holds
    o = C.is_thick(EVENS, Z, WIDE)
    assert o.fails and o.exact
    blocks = seq("factorial_blocks")
    w = Window(6, math.factorial(12) + 12, 2)
    assert C.is_thick(blocks, Z, w).holds
    o = C.is_prethick(blocks, Z, w)
    assert o.holds and o.value == 0


def test_large_examples():
    o = C.is_large(EVENS, Z, WIDE)
    assert o.holds and o.value == [0, 1]
    assert C.is_large(POW2, Z, MID).fails
    o = C.is_large(Whole(), Z, WIDE)
    assert o.holds and o.value == [0]


def test_prethick_and_small_examples():
    assert C.is_prethick(EVENS, Z, WIDE).holds
    assert C.is_small(EVENS, Z, WIDE).fails
    o = C.is_small(POW2, Z, MID)
    assert o.holds
    assert o.certificate["not_prethick"]["polarity"] == "holds"
    assert o.certificate["direct"]["polarity"] == "holds"


def test_disparse_proxy_examples():
    o = C.disparse_proxy(fp("pow", base=10), Z, Window(8, 10 ** 5, 4))
    assert o.fails and o.certificate["a"] == [1, 10, 100, 1000] and o.certificate["g"] == 0
    assert C.disparse_proxy(POW2, Z, Window(8, 2 ** 12, 3)).holds
    G = make_group("RestrictedDirectSum", {"components": ["Z"] * 6})
    P = K.build_support_partition(G, 4)
    for s in sorted(P.cells)[:5]:
        assert C.disparse_proxy(Cell(s), G, Window(2, 4, 3, 0)).holds
    with pytest.raises(ResourceError):
        C.disparse_proxy(POW2, Z, Window(8, 64, 21))


def test_disparse_proxy_never_certifies_disparseness():
    o = C.disparse_proxy(POW2, Z, Window(8, 2 ** 12, 3))
    assert "does not certify" in o.note


def test_asymptotically_scattered_examples():
    assert C.asymptotically_scattered(POW2, Z, MID).holds
    o = C.asymptotically_scattered(EVENS, Z, WIDE)
    assert o.fails and o.exact
    assert C.asymptotically_scattered(explicit(1, 2), Z, WIDE).holds


@pytest.mark.parametrize("name", sorted(C.CLASSIFIERS))
@pytest.mark.parametrize("A", [EVENS, POW2, explicit(0, 3, 9), periodic(5, [1, 2], [0], [6])],
                         ids=["evens", "pow2", "explicit", "periodic5"])
def test_outcomes_replay(name, A):
    o = C.run_classifier(name, A, Z, Window(6, 1024, 3))
    assert o.polarity in (C.HOLDS, C.FAILS, C.UNKNOWN)
    assert replays(A, Z, o)


def test_finite_group_sets():
    table = [[(i + j) % 4 for j in range(4)] for i in range(4)]
    G = make_group("FiniteGroup", {"table": table})
    A = explicit(0, 2)
    w = Window(1, 2, 2, 0)
    assert C.is_thin(A, G, w).holds
    assert C.is_large(A, G, w).holds
    assert C.is_thick(A, G, w).fails
