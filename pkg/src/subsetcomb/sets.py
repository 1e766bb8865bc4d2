"""Symbolic subsets of a group model and the three-valued finiteness judgment.

Expressions are immutable trees.  ``members(A, G, H)`` lists the elements of
length at most ``H``; ``contains(A, G, x, H)`` decides membership with term
horizon ``H`` (sequence-generated leaves only look at terms of length at most
``max(H, |x|)``).

``finiteness`` returns an exact verdict whenever the expression reduces to the
residue-class algebra of ``Z`` (or to an explicit finite set in any group) and
otherwise applies the stability rule: a set is judged finite at the window iff
no member has length in ``(H - margin, H]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Any, Callable, Iterable

from .errors import ConfigError, ModelError, ResourceError, UsageError
from .groups import FiniteGroup, GroupModel, RestrictedDirectSum, ball, is_integers

MAX_MODULUS = 1_000_000
FP_TERM_CAP = 20


# --------------------------------------------------------------------------
# windows and verdicts


@dataclass(frozen=True)
class Window:
    """Resource bounds for windowed judgments.

    ``R`` bounds quantified translates, ``H`` is the enumeration horizon,
    ``D`` the search depth.  ``scan`` caps the radius of exhaustive ball scans
    (large-set covers, direct n-thin counts) independently of ``H``.
    """

    R: int = 8
    H: int = 256
    D: int = 4
    margin: int | None = None
    scan: int = 128

    def __post_init__(self):
        if self.margin is None:
            object.__setattr__(self, "margin", self.H // 4)
        if self.R < 1 or self.D < 1 or self.margin < 0 or self.H < 2 * self.margin or self.scan < 1:
            raise ConfigError(f"invalid window {self}: need R>=1, D>=1, H>=2*margin")

    @classmethod
    def parse(cls, text: str, **extra) -> "Window":
        parts = [int(p) for p in text.split(",") if p.strip()]
        if not 3 <= len(parts) <= 4:
            raise ConfigError("window must be R,H,D[,margin]")
        return cls(*parts, **extra)

    def to_json(self) -> dict:
        return {"R": self.R, "H": self.H, "D": self.D, "margin": self.margin, "scan": self.scan}

    @classmethod
    def from_json(cls, obj: dict) -> "Window":
        return cls(obj["R"], obj["H"], obj["D"], obj.get("margin"), obj.get("scan", 128))

    def far(self, length: int) -> bool:
        return self.H - self.margin < length <= self.H


EXACT_FINITE = "ExactFinite"
EXACT_INFINITE = "ExactInfinite"
WINDOW_FINITE = "WindowFinite"
WINDOW_INFINITE = "WindowInfinite"
UNKNOWN = "Unknown"


@dataclass
class Verdict:
    tag: str
    value: Any
    certificate: dict

    @property
    def exact(self) -> bool:
        return self.tag in (EXACT_FINITE, EXACT_INFINITE)

    @property
    def finite(self) -> bool:
        return self.tag in (EXACT_FINITE, WINDOW_FINITE)

    @property
    def infinite(self) -> bool:
        return self.tag in (EXACT_INFINITE, WINDOW_INFINITE)

    @property
    def unknown(self) -> bool:
        return self.tag == UNKNOWN

    def to_json(self) -> dict:
        return {"tag": self.tag, "value": self.value, "certificate": self.certificate}


# --------------------------------------------------------------------------
# term generators


@dataclass(frozen=True)
class Gen:
    """A named built-in sequence generator with integer/string parameters."""

    name: str
    params: tuple = ()

    @classmethod
    def make(cls, name: str, **params) -> "Gen":
        if name not in GENERATORS:
            raise ConfigError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}")
        frozen = tuple(sorted((k, tuple(v) if isinstance(v, list) else v) for k, v in params.items()))
        return cls(name, frozen)

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def to_json(self, G: GroupModel | None = None) -> dict:
        out: dict = {"seq": self.name}
        for k, v in self.params:
            if k == "terms" and G is not None:
                out[k] = [G.to_json(t) for t in v]
            else:
                out[k] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_json(cls, obj: dict, G: GroupModel) -> "Gen":
        params = {k: v for k, v in obj.items() if k != "seq"}
        if "terms" in params:
            params["terms"] = tuple(G.from_json(t) for t in params["terms"])
        for k, v in params.items():
            if k != "terms" and not isinstance(v, (int, str)):
                raise ConfigError(f"generator parameter {k!r} must be an int or string")
        return cls.make(obj["seq"], **params)


class TermSource:
    """Lazily extended, cached term list of a generator in one group model."""

    def __init__(self, G: GroupModel, step: Callable[[int], Any], finite: int | None = None):
        self.G = G
        self._step = step
        self._finite = finite
        self.terms: list = []
        self.lengths: list[int] = []
        self._members: set = set()
        self.exhausted = False

    def _extend(self):
        n = len(self.terms)
        if self._finite is not None and n >= self._finite:
            self.exhausted = True
            return
        t = self._step(n)
        t = self.G.validate(t)
        ln = self.G.length(t)
        if self.lengths and ln <= self.lengths[-1]:
            raise ModelError(f"generator term {n} has length {ln}, not above previous {self.lengths[-1]}")
        self.terms.append(t)
        self.lengths.append(ln)
        self._members.add(t)

    def upto(self, H: int) -> list:
        while not self.exhausted and (not self.lengths or self.lengths[-1] <= H):
            self._extend()
        hi = len(self.lengths)
        while hi and self.lengths[hi - 1] > H:
            hi -= 1
        return self.terms[:hi]

    def first(self, n: int) -> list:
        while not self.exhausted and len(self.terms) < n:
            self._extend()
        return self.terms[:n]

    def contains(self, x) -> bool:
        self.upto(self.G.length(x))
        return x in self._members


def _axis_power(G: GroupModel, value: int, axis: int):
    if is_integers(G):
        return value
    if isinstance(G, FiniteGroup):
        raise UsageError("power sequences need an infinite model")
    if hasattr(G, "k"):  # free group: a word of `value` copies of one letter
        return (axis + 1,) * value
    v = [0] * len(G.identity)
    if isinstance(G, RestrictedDirectSum) and G.moduli[axis]:
        raise UsageError("power sequences need a Z coordinate")
    v[axis] = value
    return tuple(v)


def _gen_pow(gen: Gen, G: GroupModel) -> TermSource:
    base = gen.param("base", 2)
    start = gen.param("start", 0)
    axis = gen.param("axis", 0)
    if base < 2 or start < 0:
        raise ConfigError("pow needs base >= 2 and start >= 0")
    return TermSource(G, lambda n: _axis_power(G, base ** (n + start), axis))


def _gen_poly(gen: Gen, G: GroupModel) -> TermSource:
    power = gen.param("power", 2)
    coef = gen.param("coef", 1)
    if power < 1 or coef < 1:
        raise ConfigError("poly needs power >= 1 and coef >= 1")
    return TermSource(G, lambda n: _axis_power(G, coef * (n + 1) ** power, gen.param("axis", 0)))


def _factorial_blocks():
    out: list[int] = []
    n = 1
    fact = 1
    while True:
        fact *= n
        for k in range(n + 1):
            if not out or fact + k > out[-1]:
                out.append(fact + k)
        yield out
        n += 1


def _gen_factorial_blocks(gen: Gen, G: GroupModel) -> TermSource:
    if not is_integers(G):
        raise UsageError("factorial_blocks is defined on Z")
    it = _factorial_blocks()
    cache: list[int] = []

    def step(n):
        while len(cache) <= n:
            cache[:] = next(it)
        return cache[n]

    return TermSource(G, step)


def _gen_list(gen: Gen, G: GroupModel) -> TermSource:
    terms = gen.param("terms", ())
    return TermSource(G, lambda n: terms[n], finite=len(terms))


def _gen_construct(which: str):
    def factory(gen: Gen, G: GroupModel) -> TermSource:
        from . import construct

        return construct.term_source(which, G)

    return factory


GENERATORS: dict[str, Callable[[Gen, GroupModel], TermSource]] = {
    "pow": _gen_pow,
    "poly": _gen_poly,
    "factorial_blocks": _gen_factorial_blocks,
    "list": _gen_list,
    "pair_product_a": _gen_construct("pair_product_a"),
    "pair_product_b": _gen_construct("pair_product_b"),
    "fp_small": _gen_construct("fp_small"),
}

_SOURCES: dict = {}


def term_source(gen: Gen, G: GroupModel) -> TermSource:
    key = (gen, G)
    if key not in _SOURCES:
        _SOURCES[key] = GENERATORS[gen.name](gen, G)
    return _SOURCES[key]


# --------------------------------------------------------------------------
# expression tree


class SubsetExpr:
    def to_json(self, G: GroupModel) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class Explicit(SubsetExpr):
    elements: frozenset = frozenset()

    def to_json(self, G):
        return {"explicit": [G.to_json(x) for x in G.sorted(self.elements)]}


@dataclass(frozen=True)
class Periodic(SubsetExpr):
    """``{x in Z : x mod m in residues} | add - remove``; Z only.

    Stored in reduced form: minimal period, ``add`` disjoint from the base
    classes, ``remove`` inside them.
    """

    modulus: int
    residues: frozenset = frozenset()
    add: frozenset = frozenset()
    remove: frozenset = frozenset()

    def __post_init__(self):
        m = self.modulus
        if not isinstance(m, int) or m < 1:
            raise ConfigError(f"modulus must be a positive int, got {m!r}")
        res = frozenset(r % m for r in self.residues)
        if not res:
            m = 1
        else:
            for d in sorted(_divisors(m)):
                if all((r + d) % m in res for r in res):
                    res = frozenset(r % d for r in res)
                    m = d
                    break
        add = frozenset(x for x in self.add if x % m not in res)
        remove = frozenset(x for x in self.remove if x % m in res and x not in self.add)
        object.__setattr__(self, "modulus", m)
        object.__setattr__(self, "residues", res)
        object.__setattr__(self, "add", add)
        object.__setattr__(self, "remove", remove)

    def base(self, x: int) -> bool:
        return x % self.modulus in self.residues

    def has(self, x: int) -> bool:
        return x in self.add or (self.base(x) and x not in self.remove)

    @property
    def bound(self) -> int:
        return max((abs(x) for x in self.add | self.remove), default=0)

    @property
    def is_finite(self) -> bool:
        return not self.residues

    def shifted(self, g: int) -> "Periodic":
        return Periodic(self.modulus, frozenset(r + g for r in self.residues),
                        frozenset(x + g for x in self.add), frozenset(x + g for x in self.remove))

    def to_json(self, G=None):
        return {"periodic": {"modulus": self.modulus, "residues": sorted(self.residues),
                             "add": sorted(self.add), "remove": sorted(self.remove)}}


def _divisors(m: int) -> list[int]:
    out = set()
    for d in range(1, math.isqrt(m) + 1):
        if m % d == 0:
            out.update((d, m // d))
    return sorted(out)


@dataclass(frozen=True)
class Whole(SubsetExpr):
    def to_json(self, G):
        return {"whole": True}


@dataclass(frozen=True)
class Seq(SubsetExpr):
    gen: Gen
    strict: bool = True

    def __post_init__(self):
        if not self.strict:
            raise ConfigError("Seq generators must be strictly length-monotone")

    def to_json(self, G):
        return self.gen.to_json(G)


@dataclass(frozen=True)
class FP(SubsetExpr):
    """Finite products ``a_{i1} ... a_{ik}`` (i1 < ... < ik), optionally right-translated."""

    gen: Gen
    right: Any = None

    def to_json(self, G):
        out = {"fp": self.gen.to_json(G)}
        if self.right is not None:
            out["right"] = G.to_json(self.right)
        return out


@dataclass(frozen=True)
class PairProduct(SubsetExpr):
    """``{a_i b_j : i <= j}`` for two generated sequences."""

    gen_a: Gen
    gen_b: Gen

    def to_json(self, G):
        return {"pair": [self.gen_a.to_json(G), self.gen_b.to_json(G)]}


@dataclass(frozen=True)
class Cell(SubsetExpr):
    """A support-code cell of a restricted direct sum (see ``construct.support_code``)."""

    code: tuple

    def to_json(self, G):
        return {"cell": list(self.code)}


@dataclass(frozen=True)
class Union(SubsetExpr):
    parts: tuple

    def to_json(self, G):
        return {"union": [p.to_json(G) for p in self.parts]}


@dataclass(frozen=True)
class Intersect(SubsetExpr):
    parts: tuple

    def to_json(self, G):
        return {"intersect": [p.to_json(G) for p in self.parts]}


@dataclass(frozen=True)
class LeftTranslate(SubsetExpr):
    g: Any
    expr: SubsetExpr

    def to_json(self, G):
        return {"ltrans": G.to_json(self.g), "of": self.expr.to_json(G)}


@dataclass(frozen=True)
class RightTranslate(SubsetExpr):
    expr: SubsetExpr
    h: Any

    def to_json(self, G):
        return {"rtrans": G.to_json(self.h), "of": self.expr.to_json(G)}


def expr_from_json(obj: Any, G: GroupModel) -> SubsetExpr:
    if not isinstance(obj, dict) or len(obj) == 0:
        raise ConfigError(f"malformed subset expression: {obj!r}")
    if "explicit" in obj:
        return Explicit(frozenset(G.from_json(x) for x in obj["explicit"]))
    if "periodic" in obj:
        if not is_integers(G):
            raise UsageError("Periodic sets are defined on Z only")
        p = obj["periodic"]
        return Periodic(p["modulus"], frozenset(p.get("residues", [])),
                        frozenset(p.get("add", [])), frozenset(p.get("remove", [])))
    if "whole" in obj:
        return Whole()
    if "seq" in obj:
        return Seq(Gen.from_json(obj, G))
    if "fp" in obj:
        right = G.from_json(obj["right"]) if obj.get("right") is not None else None
        return FP(Gen.from_json(obj["fp"], G), right)
    if "pair" in obj:
        a, b = obj["pair"]
        return PairProduct(Gen.from_json(a, G), Gen.from_json(b, G))
    if "cell" in obj:
        if not isinstance(G, RestrictedDirectSum):
            raise UsageError("cells are defined on restricted direct sums")
        return Cell(tuple(int(v) for v in obj["cell"]))
    if "union" in obj:
        return Union(tuple(expr_from_json(p, G) for p in obj["union"]))
    if "intersect" in obj:
        return Intersect(tuple(expr_from_json(p, G) for p in obj["intersect"]))
    if "ltrans" in obj:
        return LeftTranslate(G.from_json(obj["ltrans"]), expr_from_json(obj["of"], G))
    if "rtrans" in obj:
        return RightTranslate(expr_from_json(obj["of"], G), G.from_json(obj["rtrans"]))
    raise ConfigError(f"malformed subset expression: {obj!r}")


# convenience constructors


def explicit(*elements) -> Explicit:
    return Explicit(frozenset(elements))


def periodic(modulus: int, residues: Iterable[int], add: Iterable[int] = (), remove: Iterable[int] = ()) -> Periodic:
    return Periodic(modulus, frozenset(residues), frozenset(add), frozenset(remove))


def seq(name: str, **params) -> Seq:
    return Seq(Gen.make(name, **params))


def fp(name: str, right=None, **params) -> FP:
    return FP(Gen.make(name, **params), right)


def _validate_tree(A: SubsetExpr, G: GroupModel) -> None:
    if isinstance(A, Explicit):
        for x in A.elements:
            if G.validate(x) != x:
                raise UsageError(f"{x!r} is not a canonical element of {G!r}")
    elif isinstance(A, Periodic) and not is_integers(G):
        raise UsageError("Periodic sets are defined on Z only")
    elif isinstance(A, (Union, Intersect)):
        for p in A.parts:
            _validate_tree(p, G)
    elif isinstance(A, LeftTranslate):
        G.validate(A.g)
        _validate_tree(A.expr, G)
    elif isinstance(A, RightTranslate):
        G.validate(A.h)
        _validate_tree(A.expr, G)


def translate(A: SubsetExpr, g, side: str = "left", G: GroupModel | None = None) -> SubsetExpr:
    """``gA`` (side="left") or ``Ag`` (side="right"); residue sets shift in place."""
    if side not in ("left", "right"):
        raise UsageError("side must be 'left' or 'right'")
    if G is not None:
        g = G.validate(g)
        _validate_tree(A, G)
    if isinstance(A, Periodic):
        if not isinstance(g, int):
            raise UsageError("Periodic sets translate by integers")
        return A.shifted(g)
    if isinstance(A, Explicit) and G is not None:
        op = (lambda x: G.op(g, x)) if side == "left" else (lambda x: G.op(x, g))
        return Explicit(frozenset(op(x) for x in A.elements))
    return LeftTranslate(g, A) if side == "left" else RightTranslate(A, g)


def union(*parts: SubsetExpr, G: GroupModel | None = None) -> SubsetExpr:
    if G is not None:
        for p in parts:
            _validate_tree(p, G)
    if all(isinstance(p, Explicit) for p in parts):
        return Explicit(frozenset().union(*(p.elements for p in parts)))
    if all(isinstance(p, (Explicit, Periodic)) for p in parts):
        _require_int_elements(parts)
        combined = _combine([_as_periodic(p) for p in parts], any)
        if combined is not None:
            return combined
    return Union(tuple(parts))


def intersect(*parts: SubsetExpr, G: GroupModel | None = None) -> SubsetExpr:
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = tuple(parts[0])
    if G is not None:
        for p in parts:
            _validate_tree(p, G)
    if all(isinstance(p, Explicit) for p in parts):
        return Explicit(reduce(frozenset.intersection, (p.elements for p in parts)))
    if all(isinstance(p, (Explicit, Periodic)) for p in parts):
        _require_int_elements(parts)
        combined = _combine([_as_periodic(p) for p in parts], all)
        if combined is not None:
            return combined
    return Intersect(tuple(parts))


def _require_int_elements(parts):
    for p in parts:
        if isinstance(p, Explicit) and not all(isinstance(x, int) for x in p.elements):
            raise UsageError("cannot mix residue-class sets with non-integer elements")


def _as_periodic(p) -> Periodic:
    return p if isinstance(p, Periodic) else Periodic(1, frozenset(), p.elements)


def _combine(ps: list[Periodic], op) -> Periodic | None:
    m = reduce(math.lcm, (p.modulus for p in ps), 1)
    if m > MAX_MODULUS:
        return None
    res = frozenset(r for r in range(m) if op(p.base(r) for p in ps))
    base = Periodic(m, res)
    add, remove = set(), set()
    for x in set().union(*(p.add | p.remove for p in ps)):
        truth = op(p.has(x) for p in ps)
        if truth and not base.base(x):
            add.add(x)
        elif not truth and base.base(x):
            remove.add(x)
    return Periodic(m, res, frozenset(add), frozenset(remove))


# --------------------------------------------------------------------------
# normalization into the exact algebra


@lru_cache(maxsize=4096)
def normal_form(A: SubsetExpr, G: GroupModel) -> Periodic | Explicit | None:
    """Periodic (in Z) or Explicit (elsewhere) form of ``A`` when one is derivable."""
    if isinstance(G, FiniteGroup):
        return Explicit(frozenset(members(A, G, 1)))
    Zmode = is_integers(G)
    if isinstance(A, Explicit):
        return _as_periodic(A) if Zmode else A
    if isinstance(A, Periodic):
        return A
    if isinstance(A, Whole):
        return Periodic(1, frozenset({0})) if Zmode else None
    if isinstance(A, Seq) and A.gen.name == "list":
        terms = frozenset(term_source(A.gen, G).first(len(A.gen.param("terms", ()))))
        return Periodic(1, frozenset(), terms) if Zmode else Explicit(terms)
    if isinstance(A, Cell) and isinstance(G, RestrictedDirectSum):
        return Explicit(frozenset(_cell_members(A, G, None)))
    if isinstance(A, (LeftTranslate, RightTranslate)):
        inner = normal_form(A.expr, G)
        if inner is None:
            return None
        g = A.g if isinstance(A, LeftTranslate) else A.h
        if isinstance(inner, Periodic):
            return inner.shifted(g)
        op = (lambda x: G.op(g, x)) if isinstance(A, LeftTranslate) else (lambda x: G.op(x, g))
        return Explicit(frozenset(op(x) for x in inner.elements))
    if isinstance(A, Union):
        forms = [normal_form(p, G) for p in A.parts]
        if any(f is None for f in forms):
            return None
        if Zmode:
            return _combine(forms, any)
        return Explicit(frozenset().union(*(f.elements for f in forms)))
    if isinstance(A, Intersect):
        forms = [normal_form(p, G) for p in A.parts]
        if all(f is not None for f in forms):
            if not Zmode:
                return Explicit(reduce(frozenset.intersection, (f.elements for f in forms)))
            combined = _combine(forms, all)
            if combined is not None:
                return combined
        finite = [f for f in forms if f is not None and (not isinstance(f, Periodic) or f.is_finite)]
        if not finite:
            return None
        pool = finite[0].add if isinstance(finite[0], Periodic) else finite[0].elements
        kept = frozenset(x for x in pool if all(contains(p, G, x, G.length(x)) for p in A.parts))
        return Periodic(1, frozenset(), kept) if Zmode else Explicit(kept)
    return None


# --------------------------------------------------------------------------
# membership


def contains(A: SubsetExpr, G: GroupModel, x, H: int = 0) -> bool:
    if isinstance(A, Explicit):
        return x in A.elements
    if isinstance(A, Periodic):
        return A.has(x)
    if isinstance(A, Whole):
        return True
    if isinstance(A, Seq):
        return term_source(A.gen, G).contains(x)
    if isinstance(A, (FP, PairProduct)):
        return x in _member_set(A, G, max(H, G.length(x)))
    if isinstance(A, Cell):
        from .construct import support_code

        return not G.is_identity(x) and support_code(G, x) == A.code
    if isinstance(A, Union):
        return any(contains(p, G, x, H) for p in A.parts)
    if isinstance(A, Intersect):
        return all(contains(p, G, x, H) for p in A.parts)
    if isinstance(A, LeftTranslate):
        return contains(A.expr, G, G.op(G.inv(A.g), x), H + G.length(A.g))
    if isinstance(A, RightTranslate):
        return contains(A.expr, G, G.op(x, G.inv(A.h)), H + G.length(A.h))
    raise UsageError(f"unsupported expression {A!r}")


def _cost(A: SubsetExpr) -> int:
    if isinstance(A, Explicit):
        return 0
    if isinstance(A, (Seq, Cell)):
        return 1
    if isinstance(A, (FP, PairProduct)):
        return 2
    if isinstance(A, (LeftTranslate, RightTranslate)):
        return _cost(A.expr)
    if isinstance(A, Union):
        return max(_cost(p) for p in A.parts)
    if isinstance(A, Intersect):
        return min(_cost(p) for p in A.parts)
    return 9


def _periodic_members(P: Periodic, H: int) -> set:
    out = {x for x in P.add if abs(x) <= H}
    m = P.modulus
    for r in P.residues:
        start = -H + ((r + H) % m)
        out.update(range(start, H + 1, m))
    out.difference_update(P.remove)
    return out


def _fp_products(G: GroupModel, terms: list) -> set:
    if len(terms) > FP_TERM_CAP:
        raise ResourceError(f"FP enumeration over {len(terms)} terms exceeds the cap of {FP_TERM_CAP}")
    prods: set = set()
    ordered: list = []
    for t in terms:
        new = [G.op(p, t) for p in ordered] + [t]
        ordered.extend(new)
    prods.update(ordered)
    return prods


def _cell_members(A: Cell, G: RestrictedDirectSum, H: int | None) -> list:
    from .construct import decode_coordinate
    import itertools

    n = A.code[0] if A.code else 0
    codes = A.code[1:]
    if n != len(codes) or n == 0:
        return []
    out = []
    for pos in itertools.combinations(range(G.n), n):
        try:
            vals = [decode_coordinate(G.moduli[i], c) for i, c in zip(pos, codes)]
        except ValueError:
            continue
        v = [0] * G.n
        for i, a in zip(pos, vals):
            v[i] = a
        x = tuple(v)
        if H is None or G.length(x) <= H:
            out.append(x)
    return out


@lru_cache(maxsize=2048)
def _member_set(A: SubsetExpr, G: GroupModel, H: int) -> frozenset:
    if isinstance(A, Explicit):
        return frozenset(x for x in A.elements if G.length(x) <= H)
    if isinstance(A, Periodic):
        return frozenset(_periodic_members(A, H))
    if isinstance(A, Whole):
        return frozenset(ball(G, H))
    if isinstance(A, Seq):
        return frozenset(term_source(A.gen, G).upto(H))
    if isinstance(A, FP):
        prods = _fp_products(G, term_source(A.gen, G).upto(H))
        if A.right is not None:
            prods = {G.op(p, A.right) for p in prods}
        return frozenset(p for p in prods if G.length(p) <= H)
    if isinstance(A, PairProduct):
        ta = term_source(A.gen_a, G).upto(H)
        tb = term_source(A.gen_b, G).upto(H)
        out = set()
        for i, a in enumerate(ta):
            for b in tb[i:]:
                x = G.op(a, b)
                if G.length(x) <= H:
                    out.add(x)
        return frozenset(out)
    if isinstance(A, Cell):
        return frozenset(_cell_members(A, G, H))
    if isinstance(A, Union):
        return frozenset().union(*(_member_set(p, G, H) for p in A.parts))
    if isinstance(A, Intersect):
        parts = sorted(A.parts, key=_cost)
        first, rest = parts[0], parts[1:]
        return frozenset(x for x in _member_set(first, G, H) if all(contains(p, G, x, H) for p in rest))
    if isinstance(A, LeftTranslate):
        inner = _member_set(A.expr, G, H + G.length(A.g))
        return frozenset(y for y in (G.op(A.g, x) for x in inner) if G.length(y) <= H)
    if isinstance(A, RightTranslate):
        inner = _member_set(A.expr, G, H + G.length(A.h))
        return frozenset(y for y in (G.op(x, A.h) for x in inner) if G.length(y) <= H)
    raise UsageError(f"unsupported expression {A!r}")


def members(A: SubsetExpr, G: GroupModel, H: int) -> list:
    """Elements of ``A`` with length <= H, in (length, canonical) order."""
    if H < 0:
        raise ConfigError("horizon must be >= 0")
    return G.sorted(_member_set(A, G, H))


# --------------------------------------------------------------------------
# finiteness


def band_counts(G: GroupModel, elems: Iterable, H: int) -> list[int]:
    """Member counts per quarter of the horizon, innermost first."""
    counts = [0, 0, 0, 0]
    for x in elems:
        ln = G.length(x)
        idx = 0 if H == 0 else min(3, (4 * ln) // (H + 1))
        counts[idx] += 1
    return counts


def finiteness(A: SubsetExpr, G: GroupModel, w: Window) -> Verdict:
    expr_json = A.to_json(G)
    try:
        form = normal_form(A, G)
    except ResourceError:
        form = None
    if isinstance(form, Periodic):
        if form.residues:
            r = min(form.residues)
            cert = {"kind": "residue-infinite", "expr": expr_json, "modulus": form.modulus,
                    "residue": r, "bound": form.bound}
            return Verdict(EXACT_INFINITE, f"contains all but finitely many of {r} mod {form.modulus}", cert)
        elems = sorted(form.add, key=lambda x: (abs(x), x))
        cert = {"kind": "residue-finite", "expr": expr_json, "members": elems}
        return Verdict(EXACT_FINITE, len(elems), cert)
    if isinstance(form, Explicit):
        elems = G.sorted(form.elements)
        cert = {"kind": "finite-superset", "expr": expr_json, "members": [G.to_json(x) for x in elems]}
        return Verdict(EXACT_FINITE, len(elems), cert)
    try:
        mem = members(A, G, w.H)
    except (ResourceError, ModelError) as exc:
        cert = {"kind": "unknown", "expr": expr_json, "reason": str(exc)}
        return Verdict(UNKNOWN, {"reason": str(exc)}, cert)
    top = [x for x in mem if w.far(G.length(x))]
    if top:
        counts = band_counts(G, mem, w.H)
        cert = {"kind": "window-infinite", "expr": expr_json, "H": w.H, "margin": w.margin,
                "top": [G.to_json(x) for x in top[:64]], "top_count": len(top), "count": len(mem),
                "bands": counts}
        return Verdict(WINDOW_INFINITE, counts, cert)
    last = max((G.length(x) for x in mem), default=-1)
    cert = {"kind": "window-finite", "expr": expr_json, "H": w.H, "margin": w.margin,
            "members": [G.to_json(x) for x in mem]}
    return Verdict(WINDOW_FINITE, last, cert)


def intersection_of_translates(A: SubsetExpr, xs: Iterable, side: str = "left") -> SubsetExpr:
    """``x_1 A cap ... cap x_k A`` as an unnormalized expression."""
    parts = tuple(LeftTranslate(x, A) if side == "left" else RightTranslate(A, x) for x in xs)
    return parts[0] if len(parts) == 1 else Intersect(parts)
