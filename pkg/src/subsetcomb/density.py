"""Solecki-type densities, box averages and the combinatorial derivation.

``sigma_R`` and ``sigma_L`` return upper bounds: the minimum over a tested
family of finite sets ``F`` of the largest overlap ratio over translates.
For residue-class sets in ``Z`` the supremum over all translates is exact;
elsewhere translates are drawn from a ball and the value is labeled
windowed.  Values are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .errors import UsageError
from .groups import FreeAbelian, GroupModel, ball, is_integers
from .sets import (
    Intersect,
    LeftTranslate,
    Periodic,
    SubsetExpr,
    Window,
    finiteness,
    members,
    normal_form,
)


def rational_json(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator, "decimal": f"{float(q):.6f}"}


@dataclass
class DensityEstimate:
    quantity: str  # sigmaR, sigmaL or folnerDensity
    value: Fraction
    direction: str  # upperBound or pointEstimate
    family: list = field(default_factory=list)
    g_radius: int | None = None
    optimizer: dict | None = None
    exact_sup: bool = False
    label: str = ""

    def to_json(self, G: GroupModel) -> dict:
        return {
            "quantity": self.quantity,
            "value": rational_json(self.value),
            "direction": self.direction,
            "family": [[G.to_json(x) for x in F] for F in self.family],
            "g_radius": self.g_radius,
            "optimizer": self.optimizer,
            "exact_sup": self.exact_sup,
            "label": self.label,
        }


# --------------------------------------------------------------------------
# families of finite sets


def intervals(maxlen: int, start: int = 0) -> list[list[int]]:
    """``[start, start + L)`` for L = 1..maxlen."""
    return [list(range(start, start + n)) for n in range(1, maxlen + 1)]


def balls(G: GroupModel, rmax: int) -> list[list]:
    return [list(ball(G, r)) for r in range(rmax + 1)]


def family_from_json(obj: Any, G: GroupModel) -> list[list]:
    """``{"intervals": L}``, ``{"interval": L}``, ``{"balls": r}`` or ``{"sets": [[...], ...]}``."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise UsageError(f"family must be a one-key object, got {obj!r}")
    (kind, arg), = obj.items()
    if kind in ("intervals", "interval"):
        if not is_integers(G):
            raise UsageError("interval families are defined on Z")
        return intervals(arg) if kind == "intervals" else [list(range(arg))]
    if kind == "balls":
        return balls(G, arg)
    if kind == "sets":
        return [[G.from_json(x) for x in F] for F in arg]
    raise UsageError(f"unknown family kind {kind!r}")


# --------------------------------------------------------------------------
# Solecki densities


def _residue_sup(P: Periodic, F: list[int]) -> tuple[Fraction, int]:
    """Exact ``sup_g |F cap (P + g)| / |F|`` in Z, with an optimizing g."""
    # beyond |g| > bound + max|F| the count depends only on g mod m
    reach = P.bound + max(abs(x) for x in F) + P.modulus
    best, arg = -1, 0
    for g in sorted(range(-reach, reach + 1), key=lambda x: (abs(x), x)):
        c = sum(1 for x in F if P.has(x - g))
        if c > best:
            best, arg = c, g
    return Fraction(best, len(F)), arg


def _sigma(quantity: str, A: SubsetExpr, G: GroupModel, family: list[list], g_radius: int) -> DensityEstimate:
    if not family:
        raise UsageError("empty family")
    if any(len(F) == 0 for F in family):
        raise UsageError("family sets must be nonempty")
    if g_radius < 1:
        raise UsageError("g_radius must be >= 1")
    form = normal_form(A, G) if is_integers(G) else None
    exact = isinstance(form, Periodic)
    best: tuple[Fraction, int, Any] | None = None
    if not exact:
        reach = max(G.length(x) for F in family for x in F) + g_radius
        M = set(members(A, G, reach))
        gs = ball(G, g_radius)
    for idx, F in enumerate(family):
        if exact:
            ratio, g = _residue_sup(form, F)
        else:
            ratio, g = Fraction(-1), None
            for h in gs:
                hi = G.inv(h)
                if quantity == "sigmaR":
                    c = sum(1 for x in F if G.op(x, hi) in M)
                else:
                    c = sum(1 for x in F if G.op(hi, x) in M)
                if Fraction(c, len(F)) > ratio:
                    ratio, g = Fraction(c, len(F)), h
        if best is None or ratio < best[0]:
            best = (ratio, idx, g)
    value, idx, g = best
    label = "exact supremum over all translates" if exact else f"translates restricted to ball({g_radius})"
    return DensityEstimate(quantity, value, "upperBound", family, None if exact else g_radius,
                           {"F": [G.to_json(x) for x in family[idx]], "index": idx, "g": G.to_json(g)},
                           exact, label)


def sigma_R(A: SubsetExpr, G: GroupModel, family: list[list], g_radius: int = 16) -> DensityEstimate:
    """``min_F max_g |F cap A g| / |F|`` over the family."""
    return _sigma("sigmaR", A, G, family, g_radius)


def sigma_L(A: SubsetExpr, G: GroupModel, family: list[list], g_radius: int = 16) -> DensityEstimate:
    """``min_F max_g |F cap g A| / |F|`` over the family."""
    return _sigma("sigmaL", A, G, family, g_radius)


def bound_sequence(A: SubsetExpr, G: GroupModel, family: list[list], g_radius: int = 16,
                   quantity: str = "sigmaR") -> list[Fraction]:
    """Running upper bounds after each family member; non-increasing."""
    out = []
    for k in range(1, len(family) + 1):
        out.append(_sigma(quantity, A, G, family[:k], g_radius).value)
    return out


# --------------------------------------------------------------------------
# box averages


def _count_residues(P: Periodic, lo: int, hi: int) -> int:
    """Members of ``P`` in ``[lo, hi]`` by residue counting."""
    m = P.modulus
    total = 0
    for r in P.residues:
        total += (hi - r) // m - (lo - 1 - r) // m
    total += sum(1 for x in P.add if lo <= x <= hi)
    total -= sum(1 for x in P.remove if lo <= x <= hi)
    return total


def folner_density(A: SubsetExpr, G: GroupModel, sizes: Iterable[int]) -> list[DensityEstimate]:
    """``|A cap [-n, n]^d| / (2n+1)^d`` for each size n; empirical box averages."""
    if not isinstance(G, FreeAbelian):
        raise UsageError("box averages need a free abelian group")
    form = normal_form(A, G) if is_integers(G) else None
    out = []
    for n in sizes:
        if n < 0:
            raise UsageError("box sizes must be >= 0")
        volume = (2 * n + 1) ** G.d
        if isinstance(form, Periodic):
            count = _count_residues(form, -n, n)
        else:
            mem = members(A, G, n * G.d)
            count = sum(1 for x in mem if all(abs(c) <= n for c in _coords(x)))
        out.append(DensityEstimate("folnerDensity", Fraction(count, volume), "pointEstimate",
                                   label=f"empirical Folner average on the box of radius {n}"))
    return out


def _coords(x) -> tuple:
    return x if isinstance(x, tuple) else (x,)


# --------------------------------------------------------------------------
# combinatorial derivation


@dataclass
class DerivationSet:
    members: list
    certificates: dict
    unknown: list
    window: Window
    exact: bool

    def to_json(self, G: GroupModel) -> dict:
        return {
            "members": [G.to_json(g) for g in self.members],
            "unknown": [G.to_json(g) for g in self.unknown],
            "exact": self.exact,
            "window": self.window.to_json(),
            "certificates": {G.text(g): c for g, c in self.certificates.items()},
        }


def derivation(A: SubsetExpr, G: GroupModel, w: Window) -> DerivationSet:
    """``{g in ball(R) : gA cap A infinite}`` with the deciding certificates."""
    found, certs, unknown = [], {}, []
    exact = True
    for g in ball(G, w.R):
        part = A if G.is_identity(g) else Intersect((LeftTranslate(g, A), A))
        v = finiteness(part, G, w)
        exact = exact and v.exact
        if v.unknown:
            unknown.append(g)
        elif v.infinite:
            found.append(g)
            certs[g] = {"tag": v.tag, **v.certificate}
    return DerivationSet(found, certs, unknown, w, exact)


def is_symmetric(D: DerivationSet, G: GroupModel) -> bool:
    """Inverse-closure of the derivation, checked on exact certificates only."""
    S = set(D.members)
    return all(G.inv(g) in S for g in D.members
               if D.certificates[g]["tag"] == "ExactInfinite" and G.length(g) <= D.window.R)
