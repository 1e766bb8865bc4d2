"""Independent replay of certificates and construction transcripts.

Three kinds of checks:

* witness certificates are checked directly (the chain's partial
  intersections are infinite, the FP products land in A, the cover covers);
* residue claims are re-derived by :func:`eventual`, a small evaluator that
  decides whether a whole residue class eventually lies in an expression,
  written without the normalizer used by the classifiers;
* exhaustive windowed certificates are replayed by recomputation and compared
  field by field, which also catches tampering.
"""

from __future__ import annotations

import itertools
import math

from . import bigbits
from .groups import GroupModel, ball, group_from_descriptor, is_integers, support
from .sets import (
    Explicit,
    Intersect,
    LeftTranslate,
    Periodic,
    RightTranslate,
    Seq,
    SubsetExpr,
    Union,
    Whole,
    Window,
    contains,
    expr_from_json,
    finiteness,
    intersection_of_translates,
)

# --------------------------------------------------------------------------
# residue evaluator


def _leaf_moduli(A: SubsetExpr) -> list[int]:
    if isinstance(A, Periodic):
        return [A.modulus]
    if isinstance(A, (Union, Intersect)):
        return [m for p in A.parts for m in _leaf_moduli(p)]
    if isinstance(A, (LeftTranslate, RightTranslate)):
        return _leaf_moduli(A.expr)
    return [1]


def eventual(A: SubsetExpr, m: int, r: int) -> bool | None:
    """Whether ``{x = r mod m}`` lies eventually in A (True), eventually outside (False), or neither.

    Only residue-class algebra in Z is decided; other leaves give None.
    """
    if isinstance(A, Periodic):
        L = math.lcm(m, A.modulus)
        hits = [(r + t * m) % A.modulus in A.residues for t in range(L // m)]
        return True if all(hits) else False if not any(hits) else None
    if isinstance(A, Whole):
        return True
    if isinstance(A, Explicit):
        return False
    if isinstance(A, Seq) and A.gen.name == "list":
        return False
    if isinstance(A, LeftTranslate):
        return eventual(A.expr, m, r - A.g)
    if isinstance(A, RightTranslate):
        return eventual(A.expr, m, r - A.h)
    if isinstance(A, Union):
        vals = [eventual(p, m, r) for p in A.parts]
        return True if True in vals else False if all(v is False for v in vals) else None
    if isinstance(A, Intersect):
        vals = [eventual(p, m, r) for p in A.parts]
        return False if False in vals else True if all(v is True for v in vals) else None
    return None


def residue_infinite(A: SubsetExpr, G: GroupModel) -> bool | None:
    """Decide infiniteness of a residue-class expression in Z by refining to the lcm of its moduli."""
    if not is_integers(G):
        return None
    L = math.lcm(*_leaf_moduli(A))
    vals = [eventual(A, L, r) for r in range(L)]
    if any(v is None for v in vals):
        return None
    return any(vals)


# --------------------------------------------------------------------------
# outcome replay


def _check_residue_claim(cert: dict, A: SubsetExpr, extra_shifts=(0,)) -> list[str]:
    m, r = cert["modulus"], cert["residue"]
    bad = [s for s in extra_shifts if eventual(A, m, r + s) is not True]
    return [f"residue class {r} mod {m} (shift {s}) not eventually inside A" for s in bad]


def _partials_infinite(A, G, xs, w) -> list[str]:
    problems = []
    for k in range(1, len(xs) + 1):
        part = intersection_of_translates(A, xs[:k])
        decided = residue_infinite(part, G)
        if decided is None:
            decided = finiteness(part, G, w).infinite
        if not decided:
            problems.append(f"partial intersection of {k} translates is not infinite")
    return problems


def _check_witness(cert: dict, A: SubsetExpr, G: GroupModel, w: Window) -> list[str]:
    kind = cert.get("kind")
    el = G.from_json
    if kind == "finite":
        listed = [el(x) for x in cert["members"]]
        probs = [f"{x} listed but not in A" for x in listed if not contains(A, G, x, w.H)]
        if residue_infinite(A, G):
            probs.append("residue evaluation finds an infinite class")
        return probs
    if kind == "whole":
        return [] if isinstance(A, Whole) or residue_infinite(A, G) else ["expression is not the whole group"]
    if kind == "thin-witness":
        g = el(cert["g"])
        return _partials_infinite(A, G, [G.identity, g], w)
    if kind == "sparse-chain":
        return _partials_infinite(A, G, [el(x) for x in cert["chain"]], w)
    if kind in ("sparse-chain-residue", "level-residue", "scatter-residue", "small-residue",
                "prethick-residue"):
        return _check_residue_claim(cert, A)
    if kind == "nthin-residue":
        return _check_residue_claim(cert, A, cert["F"])
    if kind == "thick-cofinite":
        m = cert["modulus"]
        return [] if all(eventual(A, m, r) for r in range(m)) else ["a residue class is missing"]
    if kind == "large-residue":
        F = cert["F"]
        reach = cert["bound"] + 2 * cert["modulus"] + max(abs(f) for f in F)
        miss = [x for x in range(-reach, reach + 1) if not any(contains(A, G, x - f) for f in F)]
        return [f"{x} not covered by F + A" for x in miss[:5]]
    if kind == "large-uncovered":
        B = ball(G, w.R)
        out = []
        for x in map(el, cert["uncovered"]):
            if any(contains(A, G, G.op(G.inv(f), x), w.H) for f in B):
                out.append(f"{G.text(x)} is covered")
        return out
    if kind == "large-cover":
        F = [el(f) for f in cert["F"]]
        S = cert["scan"]
        miss = [x for x in ball(G, max(S - w.R, 0))
                if not any(contains(A, G, G.op(G.inv(f), x), w.H) for f in F)]
        return [f"{G.text(x)} not covered" for x in miss[:5]]
    if kind in ("thick-witnesses", "prethick-witness"):
        target = A
        if kind == "prethick-witness":
            from .classify import spread

            target = spread(A, G, cert["s"])
        out = []
        for r, a in cert["witnesses"]:
            a = el(a)
            if not all(contains(target, G, G.op(f, a), w.H) for f in ball(G, r)):
                out.append(f"ball({r}) {G.text(a)} leaves the set")
        return out
    if kind == "fp-obstruction":
        a = [el(x) for x in cert["a"]]
        g = el(cert["g"])
        out = []
        for k in range(1, len(a) + 1):
            for idx in itertools.combinations(range(len(a)), k):
                p = G.op(G.product(*(a[i] for i in idx)), g)
                if not contains(A, G, p, w.H):
                    out.append(f"product {G.text(p)} not in A")
        if len(set(a)) != len(a):
            out.append("terms are not distinct")
        return out
    return []


def replay_outcome(record: dict) -> list[str]:
    """Problems found when replaying one classifier outcome line (empty list = accepted)."""
    from .classify import run_classifier

    G = group_from_descriptor(record["group"])
    A = expr_from_json(record["expr"], G)
    out = record["outcome"]
    w = Window.from_json(out["window"])
    params = record.get("params", {})
    name = out["class"].split("(")[0]
    fresh = run_classifier(name, A, G, w, params.get("nmax", 3), params.get("n", 1)).to_json()
    problems = []
    for key in ("class", "polarity", "exact", "certificate", "value"):
        if fresh.get(key) != out.get(key):
            problems.append(f"{key} differs on recomputation")
    cert = out["certificate"]
    problems += _check_witness(cert, A, G, w)
    if cert.get("kind") == "small-routes":
        for route in ("not_prethick", "direct"):
            problems += _check_witness(cert[route]["certificate"], A, G, w)
    return problems


# --------------------------------------------------------------------------
# construction replays


def _matches_builder(kind: str, G: GroupModel, a: list, b: list) -> list[str]:
    """The listed sequences must be the prefix that the lazy witness expression denotes."""
    from .construct import _builder

    builder = _builder(kind, G)
    builder.ensure(len(a))
    if builder.a[: len(a)] != a or builder.b[: len(b)] != b:
        return ["sequences differ from the deterministic greedy prefix"]
    return []


def verify_pair_product(obj: dict) -> list[str]:
    G = group_from_descriptor(obj["group"])
    a = [G.from_json(x) for x in obj["a"]]
    b = [G.from_json(x) for x in obj["b"]]
    probs = _matches_builder("pair", G, a, b)
    if a[0] != G.identity or b[0] != G.identity:
        probs.append("a_0 and b_0 must be the identity")

    def block(i, j):
        return {G.op(G.op(f, a[i]), b[j]) for f in ball(G, i)}

    for inst in obj["transcript"]:
        if inst["condition"] == "b-blocks-disjoint":
            i, n = inst["indices"]
            Fb = {G.op(f, b[n]) for f in ball(G, n)}
            if Fb & {G.op(f, b[i]) for f in ball(G, i)} or not inst["result"]:
                probs.append(f"b-blocks-disjoint fails at {inst['indices']}")
        else:
            (i, j), (k, m) = inst["indices"]
            if block(i, j) & block(k, m) or not inst["result"]:
                probs.append(f"product-blocks-disjoint fails at {inst['indices']}")
    return probs


def verify_fp_small(obj: dict) -> list[str]:
    G = group_from_descriptor(obj["group"])
    a = [G.from_json(x) for x in obj["a"]]
    b = [G.from_json(x) for x in obj["b"]]
    probs = _matches_builder("fp", G, a, b)
    for inst in obj["transcript"]:
        k, m = inst["indices"]
        P: list = []
        for t in a[: m + 1]:
            P = P + [G.op(p, t) for p in P] + [t]
        left = {G.op(b[k], p) for p in P}
        if any(G.op(f, p) in left for f in ball(G, k) for p in P) or not inst["result"]:
            probs.append(f"fp-translate-disjoint fails at {inst['indices']}")
    return probs


def verify_nested_classes(obj: dict) -> list[str]:
    from .construct import shifted_class_disjoint

    terms = [bigbits.from_json(x) for x in obj["terms"]]
    probs = []
    for k, t in enumerate(obj["steps"]):
        expect = bigbits.add(terms[k], bigbits.shift_mul(t, terms[k]))
        if expect != terms[k + 1]:
            probs.append(f"a_{k + 1} is not a_{k} + {t} 2^(a_{k})")
        if not bigbits.lt(terms[k], terms[k + 1]):
            probs.append(f"a_{k + 1} does not increase")
    if probs:
        return probs
    # nesting has been re-derived above, so the reduced criterion applies
    for inst in obj["transcript"]:
        res, _ = shifted_class_disjoint(terms, inst["m"], inst["n"], inst["N"], inst["i"])
        if not res or not inst["result"]:
            probs.append(f"shifted-class-disjoint fails at m={inst['m']} n={inst['n']} N={inst['N']} i={inst['i']}")
    return probs


def verify_support_partition(obj: dict) -> list[str]:
    from .construct import support_code

    G = group_from_descriptor(obj["group"])
    seen = set()
    probs = []
    for cell in obj["cells"]:
        s = tuple(cell["code"])
        for x in map(G.from_json, cell["members"]):
            if x in seen:
                probs.append(f"{G.text(x)} in two cells")
            seen.add(x)
            supp = support(G, x)
            if len(supp) != s[0] or support_code(G, x) != s:
                probs.append(f"{G.text(x)} has the wrong code for cell {list(s)}")
    seen |= set(map(G.from_json, obj["overflow"]))
    want = {x for x in ball(G, obj["horizon"]) if not G.is_identity(x)}
    if seen != want:
        probs.append("cells do not cover the ball minus the identity")
    return probs


WITNESS_CHECKS = {
    "PairProduct": verify_pair_product,
    "FPSmall": verify_fp_small,
    "nested-classes": verify_nested_classes,
}


def verify_witness(obj: dict) -> list[str]:
    if "cells" in obj:
        return verify_support_partition(obj)
    check = WITNESS_CHECKS.get(obj.get("kind"))
    return ["unknown witness kind"] if check is None else check(obj)


# --------------------------------------------------------------------------
# reports


def replay_record(record: dict) -> list[str]:
    kind = record.get("type")
    if kind == "outcome":
        return replay_outcome(record)
    if kind == "witness":
        return verify_witness(record["witness"])
    if kind in ("check", "density"):
        from .cli import recompute_record

        fresh = recompute_record(record)
        return [] if fresh == record["result"] else [f"{kind} differs on recomputation"]
    return []


def verify_lines(records: list[dict]) -> dict[str, list[str]]:
    """Map record id -> problems, for every record that fails to replay."""
    failures: dict[str, list[str]] = {}
    for rec in records:
        if "id" not in rec:
            continue
        try:
            probs = replay_record(rec)
        except Exception as exc:  # a malformed record is a replay failure, not a crash
            probs = [f"replay raised {type(exc).__name__}: {exc}"]
        if probs:
            failures[rec["id"]] = probs
    return failures


def read_report(path) -> list[dict]:
    import json

    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
