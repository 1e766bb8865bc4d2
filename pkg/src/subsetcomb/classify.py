"""Decision procedures for the size classes of a subset.

Each classifier returns a :class:`ClassOutcome` whose certificate is either an
exact proof (residue arithmetic in ``Z``, or an explicit finite set) or the
evidence of an exhaustive windowed search.  Windowed outcomes are reproducible
from ``(A, G, window)`` alone; :mod:`subsetcomb.verify` replays them.

Finite quantifiers: "every finite F" is read as ``F = ball(r)`` for ``r <= R``,
and existential witnesses are searched in canonical ball order.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable

from .errors import ModelError, ResourceError
from .groups import FiniteGroup, GroupModel, ball
from .sets import (
    Explicit,
    Intersect,
    LeftTranslate,
    Periodic,
    RightTranslate,
    SubsetExpr,
    Union,
    Verdict,
    Whole,
    Window,
    contains,
    finiteness,
    intersection_of_translates,
    members,
    normal_form,
)

log = logging.getLogger(__name__)

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown-at-window"

COMBO_CAP = 200_000  # (n+1)-subsets examined by thinness_level
SCAN_CAP = 20_000  # elements in a direct scan ball
FP_CANDIDATES = 48
FP_NODE_CAP = 200_000
TAIL_SAMPLE = 64


@dataclass
class ClassOutcome:
    cls: str
    polarity: str
    certificate: dict
    window: Window
    exact: bool = False
    note: str = ""
    value: Any = None

    @property
    def holds(self) -> bool:
        return self.polarity == HOLDS

    @property
    def fails(self) -> bool:
        return self.polarity == FAILS

    @property
    def unknown(self) -> bool:
        return self.polarity == UNKNOWN

    def to_json(self) -> dict:
        out = {"class": self.cls, "polarity": self.polarity, "window": self.window.to_json(),
               "exact": self.exact, "certificate": self.certificate}
        if self.value is not None:
            out["value"] = self.value
        if self.note:
            out["note"] = self.note
        return out


# --------------------------------------------------------------------------
# shared helpers


def _form(A: SubsetExpr, G: GroupModel):
    try:
        return normal_form(A, G)
    except (ResourceError, ModelError):
        return None


def _is_finite_form(form) -> bool:
    return isinstance(form, Explicit) or (isinstance(form, Periodic) and form.is_finite)


def _is_whole(A: SubsetExpr, G: GroupModel, form) -> bool:
    if isinstance(A, Whole):
        return True
    if isinstance(form, Periodic):
        return form.modulus == 1 and bool(form.residues) and not form.remove
    if isinstance(G, FiniteGroup) and isinstance(form, Explicit):
        return len(form.elements) == len(G.table)
    return False


def _finite_elements(form) -> list:
    return sorted(form.add) if isinstance(form, Periodic) else list(form.elements)


def _finite_cert(G: GroupModel, form, A: SubsetExpr) -> dict:
    elems = G.sorted(_finite_elements(form))
    return {"kind": "finite", "expr": A.to_json(G), "members": [G.to_json(x) for x in elems]}


def _residue_cert(kind: str, A: SubsetExpr, G: GroupModel, P: Periodic, **extra) -> dict:
    cert = {"kind": kind, "expr": A.to_json(G), "modulus": P.modulus, "residue": min(P.residues),
            "bound": P.bound}
    cert.update(extra)
    return cert


def _whole_cert(A: SubsetExpr, G: GroupModel, **extra) -> dict:
    cert = {"kind": "whole", "expr": A.to_json(G)}
    cert.update(extra)
    return cert


def _nonidentity(G: GroupModel, r: int) -> list:
    return [g for g in ball(G, r) if not G.is_identity(g)]


def scan_radius(G: GroupModel, w: Window, cap: int = SCAN_CAP) -> int:
    """Largest radius <= min(H, scan) whose ball has at most ``cap`` elements."""
    limit = min(w.H, w.scan)
    size = 0
    for r in range(limit + 1):
        size += len(G.sphere(r))
        if size > cap:
            return max(r - 1, w.R)
    return limit


def _far_in(length: int, S: int, w: Window) -> bool:
    margin = max(1, (S * w.margin) // max(w.H, 1))
    return S - margin < length <= S


def _mem(A: SubsetExpr, G: GroupModel, x, w: Window) -> bool:
    return contains(A, G, x, w.H)


def _infinite_group(G: GroupModel) -> bool:
    return not isinstance(G, FiniteGroup)


# --------------------------------------------------------------------------
# thin and n-thin


def is_thin(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    form = _form(A, G)
    if form is not None and _is_finite_form(form):
        return ClassOutcome("thin", HOLDS, _finite_cert(G, form, A), w, True, "finite sets are thin")
    if isinstance(form, Periodic):
        g = form.modulus
        v = finiteness(Intersect((LeftTranslate(g, A), A)), G, w)
        return ClassOutcome("thin", FAILS, {"kind": "thin-witness", "g": g, "intersection": v.certificate},
                            w, True)
    checked, unknown = [], []
    all_exact = True
    for g in _nonidentity(G, w.R):
        v = finiteness(Intersect((LeftTranslate(g, A), A)), G, w)
        if v.infinite:
            return ClassOutcome("thin", FAILS, {"kind": "thin-witness", "g": G.to_json(g),
                                                "intersection": v.certificate}, w, v.exact)
        if v.unknown:
            unknown.append(G.to_json(g))
        all_exact = all_exact and v.exact
        checked.append([G.to_json(g), v.tag])
    cert = {"kind": "thin-scan", "expr": A.to_json(G), "radius": w.R, "checked": checked, "unknown": unknown}
    if unknown:
        return ClassOutcome("thin", UNKNOWN, cert, w, note=f"{len(unknown)} intersections undecided")
    return ClassOutcome("thin", HOLDS, cert, w, False, "all translates in ball(R) meet A finitely")


def _translate_key(G: GroupModel, xs) -> tuple:
    base = G.inv(xs[0])
    return tuple(G.sorted({G.op(base, x) for x in xs}))


class _IntersectionCache:
    def __init__(self, A: SubsetExpr, G: GroupModel, w: Window):
        self.A, self.G, self.w = A, G, w
        self.seen: dict[tuple, Verdict] = {}

    def verdict(self, xs) -> Verdict:
        key = _translate_key(self.G, xs)
        if key not in self.seen:
            self.seen[key] = finiteness(intersection_of_translates(self.A, key), self.G, self.w)
        return self.seen[key]

    def known_finite(self, xs) -> bool:
        v = self.seen.get(_translate_key(self.G, xs))
        return v is not None and v.finite


def thinness_level(A: SubsetExpr, G: GroupModel, w: Window, nmax: int = 3) -> ClassOutcome:
    """Smallest ``n <= nmax`` such that every ``n+1`` translates of A from ball(R) meet finitely."""
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    form = _form(A, G)
    if form is not None and _is_finite_form(form):
        return ClassOutcome("thinness-level", HOLDS, _finite_cert(G, form, A), w, True,
                            "finite set: no infinite companions", value=0)
    if isinstance(form, Periodic):
        m = form.modulus
        cert = _residue_cert("level-residue", A, G, form,
                             translates=[[k * m for k in range(n + 1)] for n in range(1, nmax + 1)])
        return ClassOutcome("thinness-level", FAILS, cert, w, True,
                            f"none <= {nmax}: multiples of {m} fix an infinite residue class", value=None)
    v0 = finiteness(A, G, w)
    if v0.finite:
        return ClassOutcome("thinness-level", HOLDS, v0.certificate, w, v0.exact,
                            "finite at window: no infinite companions", value=0)
    B = ball(G, w.R)
    cache = _IntersectionCache(A, G, w)
    witnesses = []
    all_exact = True
    for n in range(1, nmax + 1):
        if math.comb(len(B), n + 1) > COMBO_CAP:
            raise ResourceError(f"C({len(B)}, {n + 1}) translate subsets exceed the cap {COMBO_CAP}")
        found, unknown = None, 0
        for xs in itertools.combinations(B, n + 1):
            if n > 1 and any(cache.known_finite(sub) for sub in itertools.combinations(xs, n)):
                continue
            v = cache.verdict(xs)
            if v.infinite:
                found = (xs, v)
                break
            unknown += v.unknown
            all_exact = all_exact and v.exact
        if found is not None:
            xs, v = found
            witnesses.append({"n": n, "translates": [G.to_json(x) for x in xs], "intersection": v.certificate})
            continue
        cert = {"kind": "level-scan", "expr": A.to_json(G), "radius": w.R, "level": n, "witnesses": witnesses}
        if unknown:
            return ClassOutcome("thinness-level", UNKNOWN, cert, w, note=f"{unknown} intersections undecided",
                                value=n)
        return ClassOutcome("thinness-level", HOLDS, cert, w, False, value=n)
    cert = {"kind": "level-scan", "expr": A.to_json(G), "radius": w.R, "level": None, "witnesses": witnesses}
    exact = all(w_["intersection"]["kind"] == "residue-infinite" for w_ in witnesses)
    return ClassOutcome("thinness-level", FAILS, cert, w, exact, f"none <= {nmax}", value=None)


def _translate_hits(A: SubsetExpr, G: GroupModel, w: Window, F: list) -> dict | None:
    """``g -> |F g cap A|`` from the members up to H, or None when that set is large."""
    try:
        M = members(A, G, w.H)
    except ResourceError:
        return None
    if len(M) * len(F) > SCAN_CAP * 4:
        return None
    hits: dict = {}
    for a in M:
        for f in F:
            g = G.op(G.inv(f), a)
            hits[g] = hits.get(g, 0) + 1
    return hits


def n_thin_direct(A: SubsetExpr, G: GroupModel, w: Window, n: int = 1) -> ClassOutcome:
    """Count ``|F g cap A|`` for ``F = ball(R)`` over a scanned ball of ``g``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cls = f"n-thin({n})"
    form = _form(A, G)
    if form is not None and _is_finite_form(form):
        elems = _finite_elements(form)
        h = max((G.length(x) for x in elems), default=0) + w.R
        cert = _finite_cert(G, form, A)
        cert["h"] = h
        return ClassOutcome(cls, HOLDS, cert, w, True, "finite sets are n-thin", value=n)
    if isinstance(form, Periodic):
        m = form.modulus
        cert = _residue_cert("nthin-residue", A, G, form, F=[k * m for k in range(n + 1)])
        return ClassOutcome(cls, FAILS, cert, w, True,
                            f"F = multiples of {m} lands n+1 times in A along a residue class", value=n)
    F = ball(G, w.R)
    hits = _translate_hits(A, G, w, F)
    if hits is not None:
        # every g with |g| <= H - R and f g in A is reached from a member
        S = max(w.H - w.R, 0)
        bad = G.sorted(g for g, c in hits.items() if c > n and G.length(g) <= S)
    else:
        S = scan_radius(G, w)
        bad = []
        for g in ball(G, S):
            count = 0
            for f in F:
                if _mem(A, G, G.op(f, g), w):
                    count += 1
                    if count > n:
                        bad.append(g)
                        break
    far_bad = [g for g in bad if _far_in(G.length(g), S, w)]
    cert = {"kind": "nthin-scan", "expr": A.to_json(G), "radius": w.R, "scan": S, "n": n,
            "bad_count": len(bad), "far_bad": [G.to_json(g) for g in far_bad[:32]]}
    if far_bad:
        return ClassOutcome(cls, FAILS, cert, w, False, "counts above n persist to the scan edge", value=n)
    cert["h"] = max((G.length(g) for g in bad), default=0)
    return ClassOutcome(cls, HOLDS, cert, w, False, value=n)


# --------------------------------------------------------------------------
# sparse


def is_sparse(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    form = _form(A, G)
    if form is not None and _is_finite_form(form):
        return ClassOutcome("sparse", HOLDS, _finite_cert(G, form, A), w, True, "finite sets are sparse")
    if isinstance(form, Periodic):
        m = form.modulus
        chain = [k * m for k in range(w.D)]
        return ClassOutcome("sparse", FAILS, _residue_cert("sparse-chain-residue", A, G, form, chain=chain),
                            w, True, f"translates by multiples of {m} share a residue class")
    B = ball(G, w.R)
    cache = _IntersectionCache(A, G, w)
    stats = {"nodes": 0, "unknown": 0}

    def dfs(start: int, chain: list) -> list | None:
        if len(chain) == w.D:
            return chain
        for j in range(start, len(B)):
            xs = chain + [B[j]]
            stats["nodes"] += 1
            v = cache.verdict(xs)
            if v.unknown:
                stats["unknown"] += 1
                continue
            if v.finite:
                continue
            found = dfs(j + 1, xs)
            if found is not None:
                return found
        return None

    chain = dfs(0, [])
    if chain is not None:
        verdicts = [cache.verdict(chain[: k + 1]) for k in range(len(chain))]
        cert = {"kind": "sparse-chain", "expr": A.to_json(G), "chain": [G.to_json(x) for x in chain],
                "partials": [v.tag for v in verdicts]}
        return ClassOutcome("sparse", FAILS, cert, w, all(v.exact for v in verdicts),
                            f"chain of {len(chain)} translates with infinite common part")
    cert = {"kind": "sparse-search", "expr": A.to_json(G), "radius": w.R, "depth": w.D, **stats}
    if stats["unknown"]:
        return ClassOutcome("sparse", UNKNOWN, cert, w, note="undecided partial intersections were pruned")
    return ClassOutcome("sparse", HOLDS, cert, w, False, f"no chain of depth {w.D} in ball(R)")


# --------------------------------------------------------------------------
# thick, large, prethick, small


def _run_radius(P: Periodic, cap: int) -> int:
    """Largest r <= cap such that some interval [a-r, a+r] lies inside P."""
    reach = P.bound + 2 * P.modulus + cap
    best = -1
    run = 0
    for x in range(-reach, reach + 1):
        run = run + 1 if P.has(x) else 0
        best = max(best, min((run - 1) // 2, cap))
    return best


def _thick_scan(A: SubsetExpr, G: GroupModel, w: Window):
    """Far members ``a`` with ``ball(r) a`` inside A, for r = 1..R."""
    far = [x for x in members(A, G, w.H) if w.far(G.length(x))]
    found = []
    for r in range(1, w.R + 1):
        F = ball(G, r)
        prev = found[-1][1] if found else None
        pool = ([prev] if prev is not None else []) + far
        a = next((x for x in pool if all(_mem(A, G, G.op(f, x), w) for f in F)), None)
        if a is None:
            return r, found, len(far)
        found.append((r, a))
    return None, found, len(far)


def is_thick(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    form = _form(A, G)
    if _is_whole(A, G, form):
        return ClassOutcome("thick", HOLDS, _whole_cert(A, G), w, True, "the whole group")
    if isinstance(G, FiniteGroup):
        return ClassOutcome("thick", FAILS, _finite_cert(G, form, A), w, True,
                            "in a finite group only the whole group is thick")
    if isinstance(form, Periodic) and form.residues and len(form.residues) == form.modulus:
        return ClassOutcome("thick", HOLDS, _residue_cert("thick-cofinite", A, G, form), w, True,
                            "cofinite sets are thick")
    if isinstance(form, Periodic) and form.residues:
        cap = form.bound + form.modulus
        r = _run_radius(form, cap) + 1
        return ClassOutcome("thick", FAILS, _residue_cert("thick-residue", A, G, form, radius=r), w, True,
                            f"no ball of radius {r} fits inside A")
    if form is not None:
        return ClassOutcome("thick", FAILS, _finite_cert(G, form, A), w, True,
                            "finite sets in an infinite group are not thick")
    r, found, probes = _thick_scan(A, G, w)
    witnesses = [[rr, G.to_json(a)] for rr, a in found]
    if r is None:
        cert = {"kind": "thick-witnesses", "expr": A.to_json(G), "witnesses": witnesses}
        return ClassOutcome("thick", HOLDS, cert, w, False, f"holds at radius {w.R}")
    cert = {"kind": "thick-scan", "expr": A.to_json(G), "radius": r, "probes": probes, "witnesses": witnesses}
    return ClassOutcome("thick", FAILS, cert, w, False, f"no far member carries ball({r})")


def _cover(A: SubsetExpr, G: GroupModel, w: Window, S: int):
    target = ball(G, max(S - w.R, 0))
    cand = ball(G, w.R)
    covers = {}
    for f in cand:
        fi = G.inv(f)
        covers[f] = {x for x in target if _mem(A, G, G.op(fi, x), w)}
    todo = set(target)
    chosen = []
    while todo:
        f = max(cand, key=lambda c: (len(covers[c] & todo), -cand.index(c)))
        gain = covers[f] & todo
        if not gain:
            break
        chosen.append(f)
        todo -= gain
    return chosen, G.sorted(todo), len(target)


def is_large(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    form = _form(A, G)
    if _is_whole(A, G, form):
        return ClassOutcome("large", HOLDS, _whole_cert(A, G, F=[G.to_json(G.identity)]), w, True,
                            "F = {e}", value=[G.to_json(G.identity)])
    if isinstance(G, FiniteGroup):
        if form.elements:
            a = min(form.elements)
            F = [G.op(g, G.inv(a)) for g in range(len(G.table))]
            cert = {"kind": "finite-group-cover", "expr": A.to_json(G), "F": sorted(F)}
            return ClassOutcome("large", HOLDS, cert, w, True, value=sorted(F))
        return ClassOutcome("large", FAILS, _finite_cert(G, form, A), w, True, "empty set")
    if isinstance(form, Periodic) and form.residues:
        m, B = form.modulus, form.bound
        F = list(range(m)) if not form.remove else list(range(B + 1, B + m + 1)) + list(range(-B - m, -B))
        return ClassOutcome("large", HOLDS, _residue_cert("large-residue", A, G, form, F=F), w, True,
                            f"F = {F if len(F) <= 8 else str(len(F)) + ' translates'}", value=F)
    if form is not None:
        return ClassOutcome("large", FAILS, _finite_cert(G, form, A), w, True,
                            "finitely many translates of a finite set are finite")
    S = scan_radius(G, w)
    chosen, uncovered, total = _cover(A, G, w, S)
    if uncovered:
        cert = {"kind": "large-uncovered", "expr": A.to_json(G), "radius": w.R, "scan": S,
                "uncovered": [G.to_json(x) for x in uncovered[:32]], "uncovered_count": len(uncovered)}
        return ClassOutcome("large", FAILS, cert, w, False, f"{len(uncovered)} of {total} elements uncovered")
    cert = {"kind": "large-cover", "expr": A.to_json(G), "scan": S, "F": [G.to_json(f) for f in chosen]}
    return ClassOutcome("large", HOLDS, cert, w, False, f"ball({S - w.R}) covered", value=cert["F"])


def spread(A: SubsetExpr, G: GroupModel, s: int) -> SubsetExpr:
    """``ball(s) A`` as a union of left translates."""
    if s == 0:
        return A
    return Union(tuple(LeftTranslate(f, A) if not G.is_identity(f) else A for f in ball(G, s)))


def is_prethick(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    form = _form(A, G)
    if isinstance(G, FiniteGroup):
        if form.elements:
            return ClassOutcome("prethick", HOLDS, {"kind": "finite-group-cover", "expr": A.to_json(G),
                                                    "F": list(range(len(G.table)))}, w, True)
        return ClassOutcome("prethick", FAILS, _finite_cert(G, form, A), w, True, "empty set")
    if _is_whole(A, G, form):
        return ClassOutcome("prethick", HOLDS, _whole_cert(A, G, s=0), w, True, "F = {e}", value=0)
    if isinstance(form, Periodic) and form.residues:
        s = form.modulus // 2
        return ClassOutcome("prethick", HOLDS, _residue_cert("prethick-residue", A, G, form, s=s), w, True,
                            f"ball({s}) A is cofinite", value=s)
    if form is not None:
        return ClassOutcome("prethick", FAILS, _finite_cert(G, form, A), w, True,
                            "translates of a finite set stay finite")
    failures = []
    for s in range(w.R // 2 + 1):
        r, found, probes = _thick_scan(spread(A, G, s), G, w)
        if r is None:
            cert = {"kind": "prethick-witness", "expr": A.to_json(G), "s": s,
                    "witnesses": [[rr, G.to_json(a)] for rr, a in found]}
            return ClassOutcome("prethick", HOLDS, cert, w, False, f"ball({s}) A is thick at radius {w.R}",
                                value=s)
        failures.append({"s": s, "radius": r, "probes": probes})
    cert = {"kind": "prethick-scan", "expr": A.to_json(G), "failures": failures}
    return ClassOutcome("prethick", FAILS, cert, w, False, f"no ball(s) A thick for s <= {w.R // 2}")


def _small_direct(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    """Small via: the complement of ball(s) A is large, for every s <= R/2."""
    form = _form(A, G)
    if isinstance(G, FiniteGroup):
        ok = not form.elements
        return ClassOutcome("small", HOLDS if ok else FAILS, _finite_cert(G, form, A), w, True)
    if isinstance(form, Periodic) and form.residues:
        s = form.modulus // 2
        cert = _residue_cert("small-residue", A, G, form, s=s)
        return ClassOutcome("small", FAILS, cert, w, True, f"ball({s}) A is cofinite, so its complement is finite")
    if form is not None:
        return ClassOutcome("small", HOLDS, _finite_cert(G, form, A), w, True,
                            "complements of finite sets are large")
    B = ball(G, w.R)
    checked = []
    for s in range(w.R // 2 + 1):
        FA = spread(A, G, s)
        probes = [x for x in members(FA, G, w.H) if w.far(G.length(x))]
        # x is covered by the complement iff some f in ball(R) has f^{-1} x outside FA
        stuck = next((x for x in probes
                      if not any(not _mem(FA, G, G.op(G.inv(f), x), w) for f in B)), None)
        if stuck is not None:
            cert = {"kind": "small-stuck", "expr": A.to_json(G), "s": s, "x": G.to_json(stuck)}
            return ClassOutcome("small", FAILS, cert, w, False,
                                f"complement of ball({s}) A misses ball(R) around a far point")
        checked.append({"s": s, "probes": len(probes)})
    cert = {"kind": "small-scan", "expr": A.to_json(G), "checked": checked}
    return ClassOutcome("small", HOLDS, cert, w, False)


def is_small(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    """Small computed twice: as not-prethick and directly through complements."""
    pre = is_prethick(A, G, w)
    direct = _small_direct(A, G, w)
    via_pre = {HOLDS: FAILS, FAILS: HOLDS}.get(pre.polarity, UNKNOWN)
    cert = {"kind": "small-routes", "expr": A.to_json(G),
            "not_prethick": {"polarity": via_pre, "exact": pre.exact, "certificate": pre.certificate},
            "direct": {"polarity": direct.polarity, "exact": direct.exact, "certificate": direct.certificate}}
    if via_pre == direct.polarity and via_pre != UNKNOWN:
        return ClassOutcome("small", via_pre, cert, w, pre.exact and direct.exact, "routes agree")
    if UNKNOWN not in (via_pre, direct.polarity):
        log.warning("small routes disagree on %s: not-prethick=%s direct=%s",
                    cert["expr"], via_pre, direct.polarity)
        cert["discrepancy"] = True
        return ClassOutcome("small", UNKNOWN, cert, w, False, "routes disagree")
    return ClassOutcome("small", UNKNOWN, cert, w, False, "a route is undecided")


# --------------------------------------------------------------------------
# finite-product obstruction


def disparse_proxy(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    """Look for ``a_1..a_D`` and ``g`` with every finite product ``a_{i1}..a_{ik} g`` in A.

    A pass is only the absence of this obstruction inside the window; it
    never certifies that A is disparse.
    """
    if w.D > 20:
        raise ResourceError(f"FP depth {w.D} needs 2^{w.D} products; the limit is 20")
    form = _form(A, G)
    if form is not None and _is_finite_form(form) and _infinite_group(G):
        return ClassOutcome("disparse-proxy", HOLDS, _finite_cert(G, form, A), w, True,
                            "a finite set holds no infinite FP set")
    nodes = 0
    for g in ball(G, w.R):
        gi = G.inv(g)
        cands = [x for x in members(RightTranslate(A, gi), G, w.H) if not G.is_identity(x)][:FP_CANDIDATES]

        def dfs(start: int, chosen: list, prods: list):
            nonlocal nodes
            if len(chosen) == w.D:
                return chosen
            for j in range(start, len(cands)):
                nodes += 1
                if nodes > FP_NODE_CAP:
                    raise ResourceError(f"FP search exceeded {FP_NODE_CAP} nodes")
                t = cands[j]
                new = [G.op(p, t) for p in prods] + [t]
                if all(_mem(A, G, G.op(q, g), w) for q in new):
                    found = dfs(j + 1, chosen + [t], prods + new)
                    if found is not None:
                        return found
            return None

        try:
            found = dfs(0, [], [])
        except ResourceError as exc:
            cert = {"kind": "fp-search", "expr": A.to_json(G), "depth": w.D, "reason": str(exc)}
            return ClassOutcome("disparse-proxy", UNKNOWN, cert, w, note=str(exc))
        if found is not None:
            cert = {"kind": "fp-obstruction", "expr": A.to_json(G), "a": [G.to_json(x) for x in found],
                    "g": G.to_json(g)}
            return ClassOutcome("disparse-proxy", FAILS, cert, w, False,
                                f"FP of {w.D} terms, right-translated by g, lies in A")
    cert = {"kind": "fp-search", "expr": A.to_json(G), "depth": w.D, "radius": w.R, "nodes": nodes}
    return ClassOutcome("disparse-proxy", HOLDS, cert, w, False,
                        f"no FP_{w.D} obstruction at window; does not certify disparseness")


# --------------------------------------------------------------------------
# asymptotic scattering


def asymptotically_scattered(A: SubsetExpr, G: GroupModel, w: Window) -> ClassOutcome:
    form = _form(A, G)
    cls = "asymptotically-scattered"
    if form is not None and _is_finite_form(form):
        return ClassOutcome(cls, HOLDS, _finite_cert(G, form, A), w, True, "no infinite subset to test")
    if isinstance(form, Periodic):
        return ClassOutcome(cls, FAILS, _residue_cert("scatter-residue", A, G, form), w, True,
                            f"every far multiple of {form.modulus} maps the class into A")
    mem = members(A, G, w.H)
    B = ball(G, w.R)
    tails = []
    for t in sorted({w.H // 2, w.H - w.margin}):
        X = [x for x in mem if G.length(x) > t]
        if len(X) > TAIL_SAMPLE:
            step = len(X) / TAIL_SAMPLE
            X = [X[int(i * step)] for i in range(TAIL_SAMPLE)]
        h_found = None
        for h in range(w.R):
            F = [f for f in B if G.length(f) > h]
            x = next((x for x in X if not any(_mem(A, G, G.op(f, x), w) for f in F)), None)
            if x is not None:
                h_found = (h, x)
                break
        if X and h_found is None:
            cert = {"kind": "scatter-stuck", "expr": A.to_json(G), "tail": t, "sample": [G.to_json(x) for x in X]}
            return ClassOutcome(cls, FAILS, cert, w, False, f"every sampled x beyond length {t} meets A")
        tails.append({"tail": t, "size": len(X),
                      "h": None if h_found is None else h_found[0],
                      "x": None if h_found is None else G.to_json(h_found[1])})
    cert = {"kind": "scatter-scan", "expr": A.to_json(G), "tails": tails}
    return ClassOutcome(cls, HOLDS, cert, w, False)


# --------------------------------------------------------------------------
# battery

CLASSIFIERS: dict[str, Callable[..., ClassOutcome]] = {
    "thin": is_thin,
    "thinness-level": thinness_level,
    "n-thin": n_thin_direct,
    "sparse": is_sparse,
    "thick": is_thick,
    "large": is_large,
    "prethick": is_prethick,
    "small": is_small,
    "disparse-proxy": disparse_proxy,
    "asymptotically-scattered": asymptotically_scattered,
}


def run_classifier(name: str, A: SubsetExpr, G: GroupModel, w: Window, nmax: int = 3, n: int = 1) -> ClassOutcome:
    fn = CLASSIFIERS[name]
    if name == "thinness-level":
        return fn(A, G, w, nmax)
    if name == "n-thin":
        return fn(A, G, w, n)
    return fn(A, G, w)


def classify_all(A: SubsetExpr, G: GroupModel, w: Window, names=None, nmax: int = 3, n: int = 1) -> list:
    return [run_classifier(name, A, G, w, nmax, n) for name in (names or CLASSIFIERS)]
