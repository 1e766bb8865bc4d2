import itertools
import random
from math import comb

import pytest

from subsetcomb.errors import ConfigError, ResourceError, UsageError
from subsetcomb.groups import (
    BUDGET_ENV,
    FiniteGroup,
    _ball_cached,
    ball,
    group_from_descriptor,
    make_group,
    sphere,
    support,
)


def _s3_table():
    perms = sorted(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    return [[idx[tuple(p[q[k]] for k in range(3))] for q in perms] for p in perms]


MODELS = {
    "Z": make_group("FreeAbelian", {"d": 1}),
    "Z3": make_group("FreeAbelian", {"d": 3}),
    "F2": make_group("FreeGroup", {"k": 2}),
    "F3": make_group("FreeGroup", {"k": 3}),
    "sum": make_group("RestrictedDirectSum", {"components": ["Z", "Z_3", "Z", "Z_2"]}),
    "S3": make_group("FiniteGroup", {"table": _s3_table()}),
}


def _random_element(G, rng, r=6):
    B = ball(G, r)
    return B[rng.randrange(len(B))]


@pytest.mark.parametrize("name", sorted(MODELS))
def test_group_axioms_on_random_triples(name):
    G = MODELS[name]
    rng = random.Random(sorted(MODELS).index(name))
    e = G.identity
    for _ in range(10_000 // len(MODELS) + 1):
        x, y, z = (_random_element(G, rng) for _ in range(3))
        assert G.op(G.op(x, y), z) == G.op(x, G.op(y, z))
        assert G.op(x, e) == x == G.op(e, x)
        assert G.op(x, G.inv(x)) == e == G.op(G.inv(x), x)
        assert G.length(G.op(x, y)) <= G.length(x) + G.length(y)
        assert G.length(G.inv(x)) == G.length(x)


def _zd_ball(d, r):
    return sum(2 ** k * comb(d, k) * comb(r, k) for k in range(d + 1))


def _fk_ball(k, r):
    return 1 + sum(2 * k * (2 * k - 1) ** (i - 1) for i in range(1, r + 1))


@pytest.mark.parametrize("d,r", [(1, 0), (1, 7), (2, 5), (3, 4), (4, 3)])
def test_free_abelian_ball_sizes(d, r):
    G = make_group("FreeAbelian", {"d": d})
    assert len(ball(G, r)) == _zd_ball(d, r)


@pytest.mark.parametrize("k,r", [(1, 5), (2, 0), (2, 4), (3, 3)])
def test_free_group_ball_sizes(k, r):
    G = make_group("FreeGroup", {"k": k})
    assert len(ball(G, r)) == _fk_ball(k, r)


def test_direct_sum_ball_matches_brute_force():
    G = MODELS["sum"]
    brute = [g for g in itertools.product(range(-4, 5), range(3), range(-4, 5), range(2))
             if G.length(g) <= 4]
    assert sorted(ball(G, 4)) == sorted(brute)


def test_ball_order_is_deterministic_and_sorted():
    for G in MODELS.values():
        B = ball(G, 3)
        assert len(set(B)) == len(B)
        lengths = [G.length(g) for g in B]
        assert lengths == sorted(lengths)
        assert list(B) == G.sorted(B)
        assert B[0] == G.identity
        assert list(B) == [g for r in range(4) for g in sphere(G, r)]


def test_free_group_words_are_reduced_and_parse_round_trip():
    G = MODELS["F2"]
    for g in ball(G, 4):
        assert all(a != -b for a, b in zip(g, g[1:]))
        assert G.parse(G.text(g)) == g
        assert G.from_json(G.to_json(g)) == g
    assert G.op(G.parse("ab"), G.parse("BA")) == G.identity
    assert G.text(G.op(G.parse("aab"), G.parse("Ba"))) == "aaa"


def test_json_round_trip_and_descriptors():
    for G in MODELS.values():
        for g in ball(G, 2):
            assert G.from_json(G.to_json(g)) == g
        assert group_from_descriptor(G.descriptor()) is G


def test_support_of_direct_sum_elements():
    G = MODELS["sum"]
    assert support(G, (0, 2, -1, 0)) == [1, 2]
    assert support(G, G.identity) == []
    with pytest.raises(UsageError):
        support(MODELS["Z"], 3)


def test_cyclic_components_use_symmetric_length():
    G = make_group("RestrictedDirectSum", {"components": ["Z_5"]})
    assert [G.length((a,)) for a in range(5)] == [0, 1, 2, 2, 1]
    assert len(ball(G, 2)) == 5


def test_finite_group_table_validation():
    with pytest.raises(ConfigError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(ConfigError):
        FiniteGroup([])
    G = MODELS["S3"]
    assert len(ball(G, 1)) == 6 and len(ball(G, 5)) == 6


def test_element_budget_is_enforced(monkeypatch):
    monkeypatch.setenv(BUDGET_ENV, "100")
    _ball_cached.cache_clear()
    try:
        with pytest.raises(ResourceError):
            ball(MODELS["F3"], 4)
        assert len(ball(MODELS["Z"], 10)) == 21
    finally:
        _ball_cached.cache_clear()


def test_bad_group_parameters():
    with pytest.raises(ConfigError):
        make_group("Nope")
    with pytest.raises(ConfigError):
        make_group("RestrictedDirectSum", {"components": ["Z_1"]})
    with pytest.raises(ConfigError):
        ball(MODELS["Z"], -1)
