"""Ideal laws checked by direct evaluation on the exact residue class in Z.

Each check returns a list of failure records (empty when the law holds) or
``None`` when the instance does not meet the law's premise.
"""

from __future__ import annotations

import itertools
import random

from . import classify as C
from .groups import GroupModel, ball
from .sets import (
    Explicit,
    SubsetExpr,
    Window,
    finiteness,
    intersection_of_translates,
    periodic,
    translate,
    union,
)

EXACT_CLASSES = ("thin", "sparse", "thick", "large", "small", "prethick")


def random_exact_set(rng: random.Random, span: int = 40) -> SubsetExpr:
    """A random Periodic or Explicit subset of Z."""
    if rng.random() < 0.3:
        return Explicit(frozenset(rng.sample(range(-span, span + 1), rng.randint(0, 6))))
    m = rng.randint(1, 7)
    res = rng.sample(range(m), rng.randint(0, m))
    add = rng.sample(range(-span, span + 1), rng.randint(0, 3))
    rem = rng.sample(range(-span, span + 1), rng.randint(0, 3))
    return periodic(m, res, add, rem)


def _finite_exact(A: SubsetExpr, G: GroupModel, xs, w: Window) -> bool | None:
    v = finiteness(intersection_of_translates(A, xs), G, w)
    if not v.exact:
        return None
    return not v.infinite


def union_chain_law(A: SubsetExpr, B: SubsetExpr, G: GroupModel, w: Window) -> list | None:
    """A non-sparse chain of ``A`` still has infinite partial intersections in ``A | B``."""
    from .verify import _partials_infinite

    out = C.is_sparse(A, G, w)
    chain = out.certificate.get("chain") if out.fails else None
    if not chain:
        return None
    problems = _partials_infinite(union(A, B), G, chain, w)
    return [{"law": "union-chain", "chain": chain, "problems": problems}] if problems else []


def translation_law(A: SubsetExpr, G: GroupModel, w: Window, g, classes=EXACT_CLASSES) -> list:
    """Exact outcomes agree between ``A`` and ``gA``."""
    At = translate(A, g, "left", G)
    failures = []
    for name in classes:
        o1 = C.run_classifier(name, A, G, w)
        o2 = C.run_classifier(name, At, G, w)
        if o1.exact and o2.exact and o1.polarity != o2.polarity:
            failures.append({"law": "translation", "class": name, "g": g})
    return failures


def _all_finite(A: SubsetExpr, G: GroupModel, B: list, k: int, w: Window) -> bool | None:
    for xs in itertools.combinations(B, k):
        fin = _finite_exact(A, G, xs, w)
        if fin is None:
            return None
        if not fin:
            return False
    return True


def union_thin_law(A: SubsetExpr, B: SubsetExpr, G: GroupModel, m: int, n: int, w: Window) -> list | None:
    """Finite (m+1)-fold and (n+1)-fold translate intersections force finite (m+n+1)-fold ones for the union.

    Translates range over ``ball(w.R)``.
    """
    pool = ball(G, w.R)
    if not (_all_finite(A, G, pool, m + 1, w) and _all_finite(B, G, pool, n + 1, w)):
        return None
    U = union(A, B)
    failures = []
    for xs in itertools.combinations(pool, m + n + 1):
        fin = _finite_exact(U, G, xs, w)
        if fin is False:
            failures.append({"law": "union-thin", "m": m, "n": n, "translates": list(xs)})
    return failures
