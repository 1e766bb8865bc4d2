"""Shared hypothesis strategies and a brute-force oracle for the residue algebra in Z."""

from hypothesis import strategies as st

from subsetcomb.sets import Explicit, Intersect, LeftTranslate, Periodic, Union, periodic


# independent membership for the residue algebra, straight from the definitions
def brute_has(A, x) -> bool:
    if isinstance(A, Explicit):
        return x in A.elements
    if isinstance(A, Periodic):
        if x in A.add:
            return True
        return x % A.modulus in A.residues and x not in A.remove
    if isinstance(A, Union):
        return any(brute_has(p, x) for p in A.parts)
    if isinstance(A, Intersect):
        return all(brute_has(p, x) for p in A.parts)
    if isinstance(A, LeftTranslate):
        return brute_has(A.expr, x - A.g)
    raise TypeError(A)


small_ints = st.integers(-30, 30)
leaves = st.one_of(
    st.builds(lambda xs: Explicit(frozenset(xs)), st.lists(small_ints, max_size=5)),
    st.builds(lambda m, res, add, rem: periodic(m, [r % m for r in res], add, rem),
              st.integers(1, 9), st.lists(st.integers(0, 8), max_size=4),
              st.lists(small_ints, max_size=3), st.lists(small_ints, max_size=3)),
)
residue_exprs = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.builds(lambda ps: Union(tuple(ps)), st.lists(kids, min_size=1, max_size=3)),
        st.builds(lambda ps: Intersect(tuple(ps)), st.lists(kids, min_size=1, max_size=3)),
        st.builds(LeftTranslate, small_ints, kids),
    ),
    max_leaves=6,
)
