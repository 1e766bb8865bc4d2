"""Command-line front end: classify, construct, density, corpus, verify.

Reports are JSON lines: a config line, one line per outcome / witness /
check (each with an ``id``), and a summary line.  Identical arguments give
identical reports apart from the summary's ``timestamp`` and ``wall_time``.

Exit codes: 0 done, 2 malformed input or empty corpus, 3 resource limit,
4 construction failure, 5 certificate replay failure, 6 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any

from . import classify as C
from . import construct as K
from . import density as Dn
from . import laws
from . import verify as V
from .errors import ConfigError, ConstructionError, ResourceError, UsageError
from .groups import GroupModel, group_from_descriptor, make_group
from .sets import (
    LeftTranslate,
    SubsetExpr,
    Union,
    Window,
    explicit,
    expr_from_json,
    periodic,
    seq,
    translate,
    union,
)

log = logging.getLogger("subsetcomb")

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_CONSTRUCT, EXIT_VERIFY, EXIT_INVARIANT = 0, 2, 3, 4, 5, 6


# --------------------------------------------------------------------------
# parsing helpers


def parse_group(text: str) -> GroupModel:
    """A JSON descriptor or a shorthand: ``Z``, ``Z^3``, ``F2``, ``sum:0,0,3`` (0 = Z), ``sum:Z*6``."""
    text = text.strip()
    if text.startswith("{"):
        return group_from_descriptor(json.loads(text))
    if text == "Z":
        return make_group("FreeAbelian", {"d": 1})
    if text.startswith("Z^"):
        return make_group("FreeAbelian", {"d": int(text[2:])})
    if text.startswith("F") and text[1:].isdigit():
        return make_group("FreeGroup", {"k": int(text[1:])})
    if text.startswith("sum:"):
        body = text[4:]
        if body.startswith("Z*"):
            comps = [0] * int(body[2:])
        else:
            comps = [int(c) for c in body.split(",") if c.strip()]
        return make_group("RestrictedDirectSum", {"components": comps})
    raise ConfigError(f"cannot parse group {text!r}")


def _load_json_arg(text: str) -> Any:
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def _window(args) -> Window:
    extra = {"scan": args.scan} if getattr(args, "scan", None) else {}
    w = Window.parse(args.window, **extra) if args.window else Window(**extra)
    if getattr(args, "depth", None):
        w = Window(w.R, w.H, args.depth, w.margin, w.scan)
    return w


def _outcome_record(rid: str, G: GroupModel, A: SubsetExpr, o: C.ClassOutcome, **params) -> dict:
    rec = {"type": "outcome", "id": rid, "group": G.descriptor(), "expr": A.to_json(G),
           "outcome": o.to_json()}
    if params:
        rec["params"] = params
    return rec


def _check_record(rid: str, name: str, args: dict, result: dict) -> dict:
    return {"type": "check", "id": rid, "check": name, "args": args, "result": result}


# --------------------------------------------------------------------------
# recomputable checks (replayed by ``verify``)


def _check_pair_tails(args):
    G = group_from_descriptor(args["group"])
    return K.check_pair_tails(K.build_pair_product(G, args["count"]), args["radius"])


def _check_pair_inclusions(args):
    G = group_from_descriptor(args["group"])
    return K.check_pair_inclusions(K.build_pair_product(G, args["count"]))


def _check_support_partition(args):
    G = group_from_descriptor(args["group"])
    return K.build_support_partition(G, args["horizon"], args.get("max_support")).check_partition()


def _check_support_isolation(args):
    G = group_from_descriptor(args["group"])
    P = K.build_support_partition(G, args["horizon"], args.get("max_support"))
    w = Window.from_json(args["window"])
    total, violations = 0, []
    for s in sorted(P.cells):
        r = K.check_support_isolation(P, s, w)
        total += r["checked"]
        violations += [dict(v, cell=list(s)) for v in r["violations"]]
    return {"kind": "support-isolation", "cells": len(P.cells), "checked": total, "violations": violations}


def _check_invariant(args):
    return INVARIANTS[args["law"]](args)


def _density(args):
    G = group_from_descriptor(args["group"])
    A = expr_from_json(args["expr"], G)
    if args["quantity"] == "folnerDensity":
        return [e.to_json(G) for e in Dn.folner_density(A, G, args["sizes"])]
    fam = Dn.family_from_json(args["family"], G)
    fn = Dn.sigma_R if args["quantity"] == "sigmaR" else Dn.sigma_L
    return fn(A, G, fam, args["g_radius"]).to_json(G)


CHECKS = {
    "pair-tails": _check_pair_tails,
    "pair-inclusions": _check_pair_inclusions,
    "support-partition": _check_support_partition,
    "support-isolation": _check_support_isolation,
    "invariant": _check_invariant,
}


def recompute_record(record: dict) -> Any:
    if record["type"] == "density":
        return _density(record["args"])
    return CHECKS[record["check"]](record["args"])


# --------------------------------------------------------------------------
# report writing


class Report:
    def __init__(self, command: str, config: dict):
        self.lines: list[dict] = [{"type": "config", "command": command, **config}]
        self.start = time.perf_counter()
        self.counts = {"holds": 0, "fails": 0, "unknown": 0, "checks": 0, "violations": 0}

    def add(self, rec: dict):
        if rec["type"] == "outcome":
            pol = rec["outcome"]["polarity"]
            self.counts["unknown" if pol == C.UNKNOWN else pol] += 1
        elif rec["type"] == "check":
            self.counts["checks"] += 1
        self.lines.append(rec)

    def finish(self, **extra) -> list[dict]:
        summary = {"type": "summary", **self.counts, **extra,
                   "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                   "wall_time": round(time.perf_counter() - self.start, 3)}
        return self.lines + [summary]


def _emit(lines: list[dict], out, fmt: str):
    if fmt == "csv":
        text = _to_csv(lines)
    else:
        text = "".join(json.dumps(rec) + "\n" for rec in lines)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _to_csv(lines: list[dict]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    dens = [r for r in lines if r["type"] == "density"]
    if dens:
        wr.writerow(["id", "familyIndex", "value", "decimal"])
        for r in dens:
            res = r["result"]
            if isinstance(res, list):
                for i, e in enumerate(res):
                    wr.writerow([r["id"], i, f"{e['value']['num']}/{e['value']['den']}", e["value"]["decimal"]])
            else:
                for i, q in enumerate(r.get("bounds", [])):
                    wr.writerow([r["id"], i, q, f"{eval_fraction(q):.6f}"])
        return buf.getvalue()
    wr.writerow(["id", "class", "polarity", "exact", "value", "note"])
    for r in lines:
        if r["type"] == "outcome":
            o = r["outcome"]
            wr.writerow([r["id"], o["class"], o["polarity"], o["exact"], json.dumps(o.get("value")), o.get("note", "")])
    return buf.getvalue()


def eval_fraction(text: str) -> float:
    num, _, den = text.partition("/")
    return int(num) / int(den or 1)


# --------------------------------------------------------------------------
# commands


def cmd_classify(args) -> int:
    G = parse_group(args.group)
    A = expr_from_json(_load_json_arg(args.set), G)
    w = _window(args)
    names = args.classes.split(",") if args.classes else list(C.CLASSIFIERS)
    unknown = [n for n in names if n not in C.CLASSIFIERS]
    if unknown:
        raise UsageError(f"unknown classes {unknown}; choose from {sorted(C.CLASSIFIERS)}")
    rep = Report("classify", {"group": G.descriptor(), "expr": A.to_json(G), "window": w.to_json(),
                              "classes": names, "nmax": args.nmax, "n": args.n})
    for i, name in enumerate(names):
        o = C.run_classifier(name, A, G, w, args.nmax, args.n)
        rep.add(_outcome_record(f"c{i:04d}", G, A, o, nmax=args.nmax, n=args.n))
    _emit(rep.finish(), args.out, args.format)
    return EXIT_OK


def _construct_pair(G, args, rep):
    count = args.count or 6
    w = K.build_pair_product(G, count, args.budget)
    rep.add({"type": "witness", "id": "w0000", "witness": w.to_json()})
    base = {"group": G.descriptor(), "count": count}
    rep.add(_check_record("k0000", "pair-tails", {**base, "radius": 3},
                          _check_pair_tails({**base, "radius": 3})))
    rep.add(_check_record("k0001", "pair-inclusions", base, _check_pair_inclusions(base)))
    if count >= 4:
        depth = min(count, 4)
        H = G.length(w.b[count - 1])
        R = max(G.length(x) for x in w.a[:depth]) + 2
        win = Window.parse(args.window) if args.window else Window(R, H, depth)
        rep.add(_outcome_record("c0000", G, w.expr, C.is_sparse(w.expr, G, win)))
        win3 = Window(win.R, win.H, 3, win.margin, win.scan)
        rep.add(_outcome_record("c0001", G, w.expr, C.disparse_proxy(w.expr, G, win3)))


def _construct_fp(G, args, rep):
    count = args.count or 5
    w = K.build_fp_small(G, count, args.budget)
    rep.add({"type": "witness", "id": "w0000", "witness": w.to_json()})
    H = sum(G.length(x) for x in w.a[1: count + 1])
    depth = min(count, 4)
    win = Window.parse(args.window) if args.window else Window(8, H, depth)
    rep.add(_outcome_record("c0000", G, w.expr, C.disparse_proxy(w.expr, G, win)))
    rep.add(_outcome_record("c0001", G, w.expr, C.is_small(w.expr, G, win)))


def _construct_support(G, args, rep):
    horizon = args.horizon or 4
    base = {"group": G.descriptor(), "horizon": horizon, "max_support": args.max_support}
    P = K.build_support_partition(G, horizon, args.max_support)
    rep.add({"type": "witness", "id": "w0000", "witness": P.to_json()})
    rep.add(_check_record("k0000", "support-partition", base, _check_support_partition(base)))
    win = Window.parse(args.window) if args.window else Window(2, horizon, 1, 0)
    iso = {**base, "window": win.to_json()}
    rep.add(_check_record("k0001", "support-isolation", iso, _check_support_isolation(iso)))


def _construct_nested(G, args, rep):
    S = K.build_nested_classes(args.N or 8, args.budget if args.budget != K.DEFAULT_BUDGET else 64)
    rep.add({"type": "witness", "id": "w0000", "witness": S.to_json()})


CONSTRUCTIONS = {
    "pair-product": _construct_pair,
    "fp-small": _construct_fp,
    "support-partition": _construct_support,
    "nested-classes": _construct_nested,
}


def cmd_construct(args) -> int:
    default_group = "sum:Z*6" if args.kind == "support-partition" else "Z"
    G = parse_group(args.group or default_group)
    rep = Report("construct", {"kind": args.kind, "group": G.descriptor(), "count": args.count,
                               "N": args.N, "horizon": args.horizon, "window": args.window})
    CONSTRUCTIONS[args.kind](G, args, rep)
    lines = rep.finish()
    violations = sum(len(r["result"].get("violations", [])) for r in lines
                     if r["type"] == "check" and isinstance(r["result"], dict))
    nested = [r for r in lines if r["type"] == "witness" and r["witness"].get("kind") == "nested-classes"]
    violations += sum(1 for r in nested for t in r["witness"]["transcript"] if not t["result"])
    lines[-1]["violations"] = violations
    _emit(lines, args.out, "json")
    return EXIT_OK


def cmd_density(args) -> int:
    G = parse_group(args.group)
    A = expr_from_json(_load_json_arg(args.set), G)
    rep = Report("density", {"group": G.descriptor(), "expr": A.to_json(G), "quantity": args.quantity})
    dargs: dict = {"group": G.descriptor(), "expr": A.to_json(G), "quantity": args.quantity}
    if args.quantity == "folnerDensity":
        dargs["sizes"] = [int(s) for s in args.sizes.split(",")]
        rec = {"type": "density", "id": "d0000", "args": dargs, "result": _density(dargs)}
    else:
        dargs["family"] = _load_json_arg(args.family)
        dargs["g_radius"] = args.g_radius
        fam = Dn.family_from_json(dargs["family"], G)
        bounds = Dn.bound_sequence(A, G, fam, args.g_radius, args.quantity)
        rec = {"type": "density", "id": "d0000", "args": dargs, "result": _density(dargs),
               "bounds": [str(q) for q in bounds]}
    rep.add(rec)
    _emit(rep.finish(), args.out, args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        records = V.read_report(args.report)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    failures = V.verify_lines(records)
    checked = sum(1 for r in records if "id" in r)
    if failures:
        for rid, probs in failures.items():
            print(f"{rid}: " + "; ".join(probs), file=sys.stderr)
        print(f"{len(failures)} of {checked} records failed replay", file=sys.stderr)
        return EXIT_VERIFY
    print(f"{checked} records replayed")
    return EXIT_OK


# --------------------------------------------------------------------------
# corpus


CORPUS_CLASSES = ("periodic", "explicit", "sequence", "free", "lattice")


def _corpus_window(G: GroupModel) -> Window:
    # margin H/2: every corpus sequence (powers of 2 and 3, squares, cubes) has a term in the top half
    if G.kind == "FreeAbelian" and G.params()["d"] == 1:
        return Window(4, 100, 3, 50, 100)
    return Window(2, 16, 3, 8, 16)


def generate_corpus(seed: int, size: int, only: str | None = None) -> list[dict]:
    """Seeded structured sets: residue classes, finite sets and sequences over Z, F_2 and Z^2."""
    rng = random.Random(seed)
    kinds = [only] if only else list(CORPUS_CLASSES)
    Zg = make_group("FreeAbelian", {"d": 1})
    F2 = make_group("FreeGroup", {"k": 2})
    Z2 = make_group("FreeAbelian", {"d": 2})
    items = []
    for i in range(size):
        kind = kinds[i % len(kinds)]
        if kind == "periodic":
            m = rng.randint(1, 12)
            res = rng.sample(range(m), rng.randint(0, m))
            A = periodic(m, res, rng.sample(range(-20, 21), rng.randint(0, 3)),
                         rng.sample(range(-20, 21), rng.randint(0, 3)))
            G = Zg
        elif kind == "explicit":
            A = explicit(*rng.sample(range(-30, 31), rng.randint(0, 6)))
            G = Zg
        elif kind == "sequence":
            base = seq("pow", base=rng.choice([2, 3])) if rng.random() < 0.6 else seq("poly", power=rng.choice([2, 3]))
            shift = rng.randint(1, 3)
            A = rng.choice([base, union(base, LeftTranslate(shift, base)), translate(base, shift, "left")])
            if rng.random() < 0.3:
                A = Union((A, explicit(*rng.sample(range(-10, 11), 2))))
            G = Zg
        elif kind == "free":
            G = F2
            A = rng.choice([seq("pow", base=2), seq("poly", power=2),
                            explicit(*[G.parse(s) for s in rng.sample(["a", "b", "ab", "AB", "aa", "bA"], 3)])])
        else:
            G = Z2
            A = rng.choice([seq("pow", base=2, axis=rng.randint(0, 1)),
                            explicit(*[(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(3)])])
        items.append({"index": i, "kind": kind, "group": G.descriptor(), "expr": A.to_json(G)})
    return items


def evaluate_item(item: dict) -> dict:
    """All corpus outcomes and cross-checks for one item (pure; safe in a worker)."""
    G = group_from_descriptor(item["group"])
    A = expr_from_json(item["expr"], G)
    w = _corpus_window(G)
    rid = f"i{item['index']:04d}"
    recs = []
    level = C.thinness_level(A, G, w, nmax=2)
    recs.append(_outcome_record(f"{rid}-level", G, A, level, nmax=2))
    problems = []
    n = level.value
    if level.holds and n:
        direct = C.n_thin_direct(A, G, w, n)
        recs.append(_outcome_record(f"{rid}-nthin{n}", G, A, direct, n=n))
        if direct.fails and direct.exact:
            problems.append(f"level {n} but n-thin({n}) fails exactly")
        if n > 1:
            lower = C.n_thin_direct(A, G, w, n - 1)
            recs.append(_outcome_record(f"{rid}-nthin{n - 1}", G, A, lower, n=n - 1))
            if lower.holds and lower.exact:
                problems.append(f"level {n} but n-thin({n - 1}) holds exactly")
    small = C.is_small(A, G, w)
    sparse = C.is_sparse(A, G, w)
    recs.append(_outcome_record(f"{rid}-small", G, A, small))
    recs.append(_outcome_record(f"{rid}-sparse", G, A, sparse))
    if small.certificate.get("discrepancy"):
        problems.append("small and not-prethick disagree")
    if small.fails and sparse.holds and w.D >= 3:
        problems.append("not small yet sparse at depth >= 3")
    return {"records": recs, "problems": problems, "exact": level.exact and small.exact and sparse.exact}


def _union_translation_laws(items: list[dict], seed: int) -> dict:
    """Union monotonicity, translation invariance and the union law for thinness on the residue class."""
    rng = random.Random(seed + 1)
    Zg = make_group("FreeAbelian", {"d": 1})
    exact_items = [it for it in items if it["kind"] in ("periodic", "explicit")]
    failures = []
    w = _corpus_window(Zg)
    thin_w = Window(3, w.H, w.D, w.margin, w.scan)
    for k, it in enumerate(exact_items):
        A = expr_from_json(it["expr"], Zg)
        B = expr_from_json(exact_items[(k + 1) % len(exact_items)]["expr"], Zg)
        found = (laws.union_chain_law(A, B, Zg, w) or [])
        found += laws.translation_law(A, Zg, w, rng.randint(-(w.R // 2), w.R // 2))
        found += laws.union_thin_law(A, B, Zg, rng.randint(1, 2), rng.randint(1, 2), thin_w) or []
        failures += [{"item": it["index"], **f} for f in found]
    return {"kind": "ideal-laws", "items": len(exact_items), "failures": failures, "violations": failures}


def _item_gates(args):
    res = evaluate_item(args["item"])
    return {"problems": res["problems"], "exact": res["exact"]}


INVARIANTS = {
    "item-gates": _item_gates,
    "ideal-laws": lambda args: _union_translation_laws(
        generate_corpus(args["seed"], args["size"], args.get("only")), args["seed"]),
}


def run_corpus(seed: int, size: int, only: str | None = None, jobs: int = 1) -> tuple[list[dict], int]:
    start = time.perf_counter()
    items = generate_corpus(seed, size, only)
    if not items:
        raise ConfigError("empty corpus")
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(evaluate_item, items))
    else:
        results = [evaluate_item(it) for it in items]
    rep = Report("corpus", {"seed": seed, "size": size, "only": only})
    rep.start = start
    violations = 0
    for it, res in zip(items, results):
        for rec in res["records"]:
            rep.add(rec)
        if res["problems"]:
            violations += len(res["problems"])
            log.warning("item %d: %s", it["index"], "; ".join(res["problems"]))
        rep.add(_check_record(f"i{it['index']:04d}-gates", "invariant",
                              {"law": "item-gates", "item": it},
                              {"problems": res["problems"], "exact": res["exact"]}))
    law_args = {"law": "ideal-laws", "seed": seed, "size": size, "only": only}
    laws = _check_invariant(law_args)
    violations += len(laws["violations"])
    rep.add(_check_record("laws", "invariant", law_args, laws))
    return rep.finish(violations=violations), violations


def cmd_corpus(args) -> int:
    if args.size <= 0:
        print("empty corpus", file=sys.stderr)
        return EXIT_INPUT
    if args.only and args.only not in CORPUS_CLASSES:
        raise UsageError(f"--only must be one of {CORPUS_CLASSES}")
    lines, violations = run_corpus(args.seed, args.size, args.only, args.jobs)
    _emit(lines, args.out, args.format)
    return EXIT_INVARIANT if violations else EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subsetcomb", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, window=True):
        sp.add_argument("--group", default=None, help="Z, Z^d, Fk, sum:0,0,3, sum:Z*6 or a JSON descriptor")
        sp.add_argument("--out", default=None)
        if window:
            sp.add_argument("--window", default=None, help="R,H,D[,margin]")
            sp.add_argument("--depth", type=int, default=None)
            sp.add_argument("--scan", type=int, default=None)
        sp.add_argument("--seed", type=int, default=1)

    c = sub.add_parser("classify", help="run the classifier battery on one set")
    common(c)
    c.add_argument("--set", required=True, help="JSON expression or @file")
    c.add_argument("--classes", default=None)
    c.add_argument("--nmax", type=int, default=3)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--format", choices=["json", "csv"], default="json")

    k = sub.add_parser("construct", help="build a separating witness")
    k.add_argument("kind", choices=sorted(CONSTRUCTIONS))
    common(k)
    k.add_argument("--count", type=int, default=None)
    k.add_argument("--N", type=int, default=None)
    k.add_argument("--horizon", type=int, default=None)
    k.add_argument("--max-support", dest="max_support", type=int, default=None)
    k.add_argument("--budget", type=int, default=K.DEFAULT_BUDGET)

    d = sub.add_parser("density", help="Solecki upper bounds or box averages")
    common(d, window=False)
    d.add_argument("--set", required=True)
    d.add_argument("--quantity", choices=["sigmaR", "sigmaL", "folnerDensity"], default="sigmaR")
    d.add_argument("--family", default='{"intervals": 8}')
    d.add_argument("--g-radius", dest="g_radius", type=int, default=16)
    d.add_argument("--sizes", default="10,100,1000")
    d.add_argument("--format", choices=["json", "csv"], default="json")

    q = sub.add_parser("corpus", help="seeded corpus with cross-checks")
    common(q, window=False)
    q.add_argument("--size", type=int, default=100)
    q.add_argument("--only", default=None, help="restrict to one item class")
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--format", choices=["json", "csv"], default="json")

    v = sub.add_parser("verify", help="replay every certificate in a report")
    v.add_argument("report")
    return p


COMMANDS = {
    "classify": cmd_classify,
    "construct": cmd_construct,
    "density": cmd_density,
    "corpus": cmd_corpus,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "group", "") is None and args.command in ("classify", "density"):
        args.group = "Z"
    try:
        return COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCT
    except (ConfigError, UsageError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
