"""Greedy builders for the separating witness sets and the support-code partition.

All builders pick the first admissible candidate in canonical ball order and
record every disjointness instance they check, so a transcript can be
replayed without trusting the search (see :mod:`subsetcomb.verify`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from . import bigbits
from .errors import ConfigError, ConstructionError, ResourceError, UsageError
from .groups import GroupModel, RestrictedDirectSum, ball, element_budget, support
from .sets import (
    FP,
    Cell,
    Gen,
    LeftTranslate,
    PairProduct,
    SubsetExpr,
    TermSource,
    Window,
    contains,
)

DEFAULT_BUDGET = 200_000
GROWTH = 3  # pair-product terms grow at least geometrically in length


def _candidates(G: GroupModel, min_length: int, budget: int):
    """Elements of length >= min_length in canonical order, at most ``budget`` of them."""
    tried = 0
    r = min_length
    limit = element_budget()
    while True:
        outer, inner = G.ball_size(r), G.ball_size(r - 1) if r > 0 else 0
        size = None if outer is None or inner is None else outer - inner
        if size is not None and size > limit:
            raise ResourceError(f"candidates of length {r} exceed the element budget {limit}")
        sph = G.sphere(r)
        if not sph and r > min_length + 2 and G.kind == "FiniteGroup":
            return
        for x in sph:
            if tried >= budget:
                return
            tried += 1
            yield x
        r += 1


def _block(G, F, a, b):
    return frozenset(G.op(G.op(f, a), b) for f in F)


# --------------------------------------------------------------------------
# pair-product witness: sparse fails, disparse evidence holds


class PairProductBuilder:
    """Sequences (a_n), (b_n) whose blocks ``F_i a_i b_j`` (i <= j) are pairwise disjoint.

    ``F_n`` is ``ball(n)``.  Each new term is the first candidate, strictly
    longer than its predecessor, that keeps every block disjoint from all
    committed ones; ``F_{n+1} b_{n+1}`` must also miss every ``F_i b_i``.
    """

    def __init__(self, G: GroupModel, budget: int = DEFAULT_BUDGET):
        self.G = G
        self.budget = budget
        e = G.identity
        self.a = [e]
        self.b = [e]
        self.blocks: dict[tuple[int, int], frozenset] = {(0, 0): frozenset({e})}
        self.owner: dict = {e: (0, 0)}
        self.fb: dict = {e: 0}  # element -> i for the sets F_i b_i
        self.transcript: list[dict] = []

    def F(self, n):
        return ball(self.G, n)

    def extend(self):
        G = self.G
        n = len(self.b) - 1
        Fn1 = self.F(n + 1)
        chosen_b = None
        floor_b = GROWTH * (G.length(self.b[-1]) + G.length(self.a[-1])) + 1
        for cand in _candidates(G, floor_b, self.budget):
            fb_new = {G.op(f, cand) for f in Fn1}
            if any(x in self.fb for x in fb_new):
                continue
            new_blocks = {}
            used: set = set()
            ok = True
            for i in range(n + 1):
                blk = _block(G, self.F(i), self.a[i], cand)
                if any(x in self.owner or x in used for x in blk):
                    ok = False
                    break
                used |= blk
                new_blocks[(i, n + 1)] = blk
            if ok:
                chosen_b = cand
                break
        if chosen_b is None:
            raise ConstructionError(f"disjoint blocks for b_{n + 1}", f"no admissible candidate within {self.budget}")
        for i in range(n + 1):
            self.transcript.append({"condition": "b-blocks-disjoint", "indices": [i, n + 1], "result": True})
        committed = list(self.blocks)
        for key in sorted(new_blocks):
            for other in committed:
                self.transcript.append({"condition": "product-blocks-disjoint", "indices": [list(key), list(other)], "result": True})
            committed.append(key)
        chosen_a = None
        for cand in _candidates(G, GROWTH * G.length(self.a[-1]) + 1, self.budget):
            if cand in self.a:
                continue
            blk = _block(G, Fn1, cand, chosen_b)
            if any(x in self.owner for x in blk) or any(x in s for s in new_blocks.values() for x in blk):
                continue
            chosen_a = cand
            break
        if chosen_a is None:
            raise ConstructionError(f"disjoint product blocks for a_{n + 1}", f"no admissible candidate within {self.budget}")
        new_blocks[(n + 1, n + 1)] = blk
        for other in committed:
            self.transcript.append({"condition": "product-blocks-disjoint", "indices": [[n + 1, n + 1], list(other)], "result": True})
        self.a.append(chosen_a)
        self.b.append(chosen_b)
        for key, s in new_blocks.items():
            self.blocks[key] = s
            for x in s:
                self.owner[x] = key
        for f in Fn1:
            self.fb[G.op(f, chosen_b)] = n + 1

    def ensure(self, count: int):
        while len(self.a) < count:
            self.extend()


class FPSmallBuilder:
    """Sequences with ``b_k FP(a) cap F_k FP(a)`` empty on every generated prefix.

    ``a_0`` is the identity; ``b_0`` the first non-identity element.  Each
    ``b_{m+1}`` and ``a_{m+1}`` is the first strictly longer candidate keeping
    the condition for every k <= m+1 over the enlarged product set.
    """

    def __init__(self, G: GroupModel, budget: int = DEFAULT_BUDGET):
        self.G = G
        self.budget = budget
        e = G.identity
        self.a = [e]
        self.prods: list = [e]  # FP(a_0..a_m) in index order, duplicates removed
        first = next((x for x in _candidates(G, 1, budget)), None)
        if first is None:
            raise ConstructionError("b_0", "group has no non-identity element")
        self.b = [first]
        self.transcript: list[dict] = []

    def _fp_with(self, t):
        G = self.G
        new = [G.op(p, t) for p in self.prods] + [t]
        seen = set(self.prods)
        out = list(self.prods)
        for x in new:
            if x not in seen:
                seen.add(x)
                out.append(x)
        return out

    def _ok(self, k: int, bk, P) -> bool:
        G = self.G
        left = {G.op(bk, p) for p in P}
        return not any(G.op(f, p) in left for f in ball(G, k) for p in P)

    def extend(self):
        G = self.G
        m = len(self.a) - 1
        P = self.prods
        inv = G.inv
        # b P meets F P  iff  b = s p^{-1} for some s in F P, p in P
        FP_next = {G.op(f, p) for f in ball(G, m + 1) for p in P}
        forbidden_b = {G.op(s, inv(p)) for s in FP_next for p in P}
        chosen_b = next((c for c in _candidates(G, G.length(self.b[-1]) + 1, self.budget)
                         if c not in forbidden_b), None)
        if chosen_b is None:
            raise ConstructionError(f"disjoint fp translates for b_{m + 1}", f"no admissible candidate within {self.budget}")
        bs = self.b + [chosen_b]
        # new coincidences after appending a: (b_k p) a = s or (f q) a = b_k p, with s = f q
        forbidden_a: set = set()
        for k in range(m + 2):
            S = {G.op(f, q) for f in ball(G, k) for q in P}
            T = {G.op(bs[k], p) for p in P}
            for t in T:
                ti = inv(t)
                for x in S:
                    forbidden_a.add(G.op(ti, x))
                    forbidden_a.add(G.op(inv(x), t))
        chosen_a = None
        for cand in _candidates(G, G.length(self.a[-1]) + 1, self.budget):
            if cand in forbidden_a or cand in self.a:
                continue
            chosen_a = cand
            break
        if chosen_a is None:
            raise ConstructionError(f"disjoint fp translates for a_{m + 1}", f"no admissible candidate within {self.budget}")
        self.prods = self._fp_with(chosen_a)
        self.a.append(chosen_a)
        self.b = bs
        for k in range(m + 2):
            self.transcript.append({"condition": "fp-translate-disjoint", "indices": [k, m + 1], "result": True})

    def ensure(self, count: int):
        """Generate until ``count`` non-identity terms a_1..a_count exist."""
        while len(self.a) < count + 1:
            self.extend()


_BUILDERS: dict = {}


def _builder(kind: str, G: GroupModel):
    key = (kind, G)
    if key not in _BUILDERS:
        _BUILDERS[key] = PairProductBuilder(G) if kind == "pair" else FPSmallBuilder(G)
    return _BUILDERS[key]


def term_source(which: str, G: GroupModel) -> TermSource:
    """Lazy infinite continuation of a greedy witness sequence."""
    if which in ("pair_product_a", "pair_product_b"):
        builder = _builder("pair", G)
        seqname = "a" if which.endswith("a") else "b"

        def step(n):
            builder.ensure(n + 1)
            return getattr(builder, seqname)[n]

        return TermSource(G, step)
    if which == "fp_small":
        builder = _builder("fp", G)

        def step(n):
            builder.ensure(n + 1)
            return builder.a[n + 1]

        return TermSource(G, step)
    raise ConfigError(f"unknown construction sequence {which!r}")


@dataclass
class SeparationWitness:
    kind: str  # "PairProduct" or "FPSmall"
    group: GroupModel
    count: int
    a: list
    b: list
    expr: SubsetExpr
    transcript: list = field(default_factory=list)

    def elements(self) -> list:
        """Elements of the generated prefix of the witness set."""
        G = self.group
        if self.kind == "PairProduct":
            out = {G.op(self.a[i], self.b[j]) for j in range(len(self.b)) for i in range(j + 1)}
        else:
            terms = [x for x in self.a if x != G.identity]
            out = set()
            acc: list = []
            for t in terms:
                acc = acc + [G.op(p, t) for p in acc] + [t]
            out = set(acc)
        return G.sorted(out)

    def to_json(self) -> dict:
        G = self.group
        return {
            "kind": self.kind,
            "group": G.descriptor(),
            "count": self.count,
            "a": [G.to_json(x) for x in self.a],
            "b": [G.to_json(x) for x in self.b],
            "expr": self.expr.to_json(G),
            "transcript": self.transcript,
        }


def build_pair_product(G: GroupModel, count: int, budget: int = DEFAULT_BUDGET) -> SeparationWitness:
    """``A = {a_i b_j : i <= j < count}`` with all blocks ``F_i a_i b_j`` disjoint."""
    if count < 1:
        raise ConfigError("count must be >= 1")
    expr = PairProduct(Gen.make("pair_product_a"), Gen.make("pair_product_b"))
    if count == 1:
        return SeparationWitness("PairProduct", G, 1, [G.identity], [G.identity], expr, [])
    builder = _builder("pair", G)
    builder.budget = max(builder.budget, budget)
    builder.ensure(count)
    n_instances = _pair_transcript_len(count)
    return SeparationWitness("PairProduct", G, count, builder.a[:count], builder.b[:count], expr,
                         builder.transcript[:n_instances])


def _pair_transcript_len(count: int) -> int:
    total = 0
    blocks = 1
    for n in range(count - 1):
        total += n + 1  # b-block instances
        for _ in range(n + 1):
            total += blocks
            blocks += 1
        total += blocks
        blocks += 1
    return total


def build_fp_small(G: GroupModel, count: int, budget: int = DEFAULT_BUDGET) -> SeparationWitness:
    """``A = FP(a_1, ..., a_count)`` with the smallness condition on the prefix.

    The identity term ``a_0`` is kept in the sequences but left out of ``A``
    (it only adds the identity element to the product set).
    """
    if count < 1:
        raise ConfigError("count must be >= 1")
    builder = _builder("fp", G)
    builder.budget = max(builder.budget, budget)
    builder.ensure(count)
    n_inst = sum(m + 2 for m in range(count))
    return SeparationWitness("FPSmall", G, count, builder.a[: count + 1], builder.b[: count + 1],
                         FP(Gen.make("fp_small")), builder.transcript[:n_inst])


def pair_product_chain(w: SeparationWitness, depth: int) -> list:
    """The designated non-sparseness chain ``a_0^{-1}, ..., a_{depth-1}^{-1}``."""
    G = w.group
    return [G.inv(x) for x in w.a[:depth]]


def check_pair_tails(w: SeparationWitness, radius: int) -> dict:
    """Exhaustively check ``g (A minus A_m) cap A`` is empty for ``g`` in ball(m), m = |g| <= radius.

    Restricted to generated indices.
    """
    G = w.group
    n = len(w.a)
    A = {G.op(w.a[i], w.b[j]) for j in range(n) for i in range(j + 1)}
    checked = 0
    violations = []
    for g in ball(G, radius):
        if G.is_identity(g):
            continue
        m = G.length(g)
        for j in range(n):
            for i in range(m + 1, j + 1):
                checked += 1
                y = G.op(g, G.op(w.a[i], w.b[j]))
                if y in A:
                    violations.append({"g": G.to_json(g), "i": i, "j": j})
    return {"kind": "pair-tail-isolation", "radius": radius, "checked": checked, "violations": violations}


def check_pair_inclusions(w: SeparationWitness) -> dict:
    """``{b_j : j >= k}`` inside ``a_0^{-1}A cap ... cap a_k^{-1}A`` for generated indices."""
    G = w.group
    failures = []
    for k in range(len(w.a)):
        for j in range(k, len(w.b)):
            for i in range(k + 1):
                if not contains(LeftTranslate(G.inv(w.a[i]), w.expr), G, w.b[j], 0):
                    failures.append([k, j, i])
    return {"kind": "pair-inclusions", "failures": failures}


# --------------------------------------------------------------------------
# support-code partition of restricted direct sums


def encode_coordinate(modulus: int, value: int) -> int:
    """Bijection component minus identity -> positive integers (zigzag on Z)."""
    if modulus == 0:
        if value == 0:
            raise ValueError("identity coordinate has no code")
        return 2 * value - 1 if value > 0 else -2 * value
    if not 0 < value < modulus:
        raise ValueError("identity coordinate has no code")
    return value


def decode_coordinate(modulus: int, code: int) -> int:
    if code < 1:
        raise ValueError("codes are positive")
    if modulus == 0:
        return (code + 1) // 2 if code % 2 else -(code // 2)
    if code >= modulus:
        raise ValueError(f"code {code} out of range for Z_{modulus}")
    return code


def support_code(G: GroupModel, g) -> tuple:
    """``(n, f(g_1), ..., f(g_n))`` over the ascending support of ``g != e``."""
    supp = support(G, g)
    if not supp:
        raise UsageError("the identity has no support code")
    return (len(supp),) + tuple(encode_coordinate(G.moduli[i], g[i]) for i in supp)


@dataclass
class SupportPartition:
    group: RestrictedDirectSum
    horizon: int
    cells: dict  # code -> list of members in ball(horizon)
    identity_remainder: Any
    overflow: list = field(default_factory=list)

    def exprs(self) -> dict:
        return {s: Cell(s) for s in self.cells}

    def check_partition(self) -> dict:
        """Pairwise disjointness and exact cover of ball(horizon) minus the identity."""
        G = self.group
        seen: dict = {}
        overlaps = []
        for s, elems in self.cells.items():
            for x in elems:
                if x in seen:
                    overlaps.append([G.to_json(x), list(seen[x]), list(s)])
                seen[x] = s
        target = [x for x in ball(G, self.horizon) if not G.is_identity(x)]
        covered = set(seen) | set(self.overflow)
        missing = [G.to_json(x) for x in target if x not in covered]
        extra = [G.to_json(x) for x in covered if G.length(x) > self.horizon or G.is_identity(x)]
        # membership via the cell expressions must agree with the listing
        mismatches = []
        for x in target:
            owners = [s for s in self.cells if contains(Cell(s), G, x)]
            listed = [s for s, elems in self.cells.items() if x in elems]
            if owners != listed:
                mismatches.append(G.to_json(x))
        return {"kind": "support-partition", "cells": len(self.cells), "elements": len(target),
                "overlaps": overlaps, "missing": missing, "extra": extra, "mismatches": mismatches,
                "ok": not (overlaps or missing or extra or mismatches)}

    def to_json(self) -> dict:
        G = self.group
        return {
            "group": G.descriptor(),
            "horizon": self.horizon,
            "identity_remainder": G.to_json(self.identity_remainder),
            "cells": [{"code": list(s), "members": [G.to_json(x) for x in elems]}
                      for s, elems in sorted(self.cells.items())],
            "overflow": [G.to_json(x) for x in self.overflow],
        }


def build_support_partition(G: GroupModel, horizon: int, max_support: int | None = None) -> SupportPartition:
    if not isinstance(G, RestrictedDirectSum):
        raise UsageError("the support-code partition needs a RestrictedDirectSum model")
    cells: dict = {}
    overflow = []
    for x in ball(G, horizon):
        if G.is_identity(x):
            continue
        s = support_code(G, x)
        if max_support is not None and s[0] > max_support:
            overflow.append(x)
            continue
        cells.setdefault(s, []).append(x)
    return SupportPartition(G, horizon, cells, G.identity, overflow)


def check_support_isolation(P: SupportPartition, s: tuple, w: Window) -> dict:
    """For g != e in ball(R) and x in D_s with disjoint supports, g x must leave D_s."""
    from .sets import _cell_members

    G = P.group
    s = tuple(s)
    if s not in P.cells:
        raise UsageError(f"cell {s} was not generated")
    xs = _cell_members(Cell(s), G, w.H)
    checked = 0
    violations = []
    for g in ball(G, w.R):
        if G.is_identity(g):
            continue
        sg = set(support(G, g))
        for x in xs:
            if sg & set(support(G, x)):
                continue
            checked += 1
            y = G.op(g, x)
            if not G.is_identity(y) and support_code(G, y) == s:
                violations.append({"g": G.to_json(g), "x": G.to_json(x)})
    return {"kind": "support-isolation", "cell": list(s), "R": w.R, "H": w.H,
            "checked": checked, "violations": violations}


# --------------------------------------------------------------------------
# nested residue classes a_n + 2^{a_n} Z


@dataclass
class NestedClasses:
    terms: list  # bigbits values, strictly increasing
    steps: list  # t_k with a_{k+1} = a_k + t_k 2^{a_k}
    transcript: list

    @property
    def violations(self) -> list:
        return [t for t in self.transcript if not t["result"]]

    def to_json(self) -> dict:
        return {
            "kind": "nested-classes",
            "terms": [bigbits.to_json(a) for a in self.terms],
            "steps": self.steps,
            "transcript": self.transcript,
        }


def shifted_class_disjoint(terms: list, m: int, n: int, N: int, i: int) -> tuple[bool, str]:
    """Is ``(a_n + 2^{a_n} Z) cap (i + a_N + 2^{a_N} Z)`` empty?  (n <= N, nested classes)

    Empty iff ``a_n`` and ``i + a_N`` differ modulo ``2^{a_n}``.  With small
    numbers this is computed directly; otherwise nesting gives
    ``a_N = a_n (mod 2^{a_n})`` and the test reduces to ``2^{a_n}`` not
    dividing ``i``.
    """
    an, aN = terms[n], terms[N]
    if isinstance(an, int) and an <= 4096 and isinstance(aN, int):
        return (an - (i + aN)) % (1 << an) != 0, "direct"
    if i == 0:
        return False, "nesting"
    return bigbits.lt(bigbits.v2(abs(i)), an), "nesting"


def build_nested_classes(N: int = 8, budget: int = 64, start: int = 1) -> NestedClasses:
    """Nested classes ``a_n + 2^{a_n} Z`` satisfying the shifted-disjointness condition on the prefix."""
    if N < 2:
        raise ConfigError("N must be >= 2")
    terms: list = [bigbits.from_int(start)]
    steps: list = []
    transcript: list = []
    for new in range(1, N):
        prev = terms[-1]
        accepted = None
        for t in range(1, budget + 1):
            cand = bigbits.add(prev, bigbits.shift_mul(t, prev))
            trial = terms + [cand]
            rows = []
            ok = True
            for m in range(new):
                for n in range(m + 1, new + 1):
                    for i in itertools.chain(range(-(m + 1), 0), range(1, m + 2)):
                        res, method = shifted_class_disjoint(trial, m, n, new, i)
                        rows.append({"condition": "shifted-class-disjoint", "m": m, "n": n, "N": new, "i": i,
                                     "method": method, "result": res})
                        ok = ok and res
            if ok:
                accepted = (t, cand, rows)
                break
        if accepted is None:
            raise ConstructionError(f"disjoint shifted classes for a_{new}", f"no multiplier t <= {budget}")
        t, cand, rows = accepted
        terms.append(cand)
        steps.append(t)
        transcript.extend(rows)
    return NestedClasses(terms, steps, transcript)
