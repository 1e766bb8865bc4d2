"""Operational models of countable groups with deterministic ball enumeration.

Every model exposes ``identity``, ``op``, ``inv``, ``length`` and a total
sort ``key`` on canonical forms.  Balls are ordered by ``(length, key)``.

Canonical element forms:

* ``FreeAbelian(1)``: a Python ``int``.
* ``FreeAbelian(d)``, ``RestrictedDirectSum``: a tuple of ints (``Z_m``
  coordinates are kept in ``range(m)``).
* ``FreeGroup(k)``: a reduced tuple of nonzero ints, ``+i`` the i-th
  generator and ``-i`` its inverse.  Text form uses ``a, b, ...`` and
  upper case for inverses.
* ``FiniteGroup``: an int index into the multiplication table.
"""

from __future__ import annotations

import functools
import itertools
import os
import string
from math import comb
from typing import Any, Iterator, Sequence

from .errors import ConfigError, ResourceError, UsageError

BUDGET_ENV = "SUBSETCOMB_ELEMENT_BUDGET"
DEFAULT_BUDGET = 2_000_000


def element_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{BUDGET_ENV} must be positive")
    return value


class GroupModel:
    kind: str = ""

    identity: Any

    def op(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def length(self, g) -> int:
        raise NotImplementedError

    def key(self, g):
        raise NotImplementedError

    def sphere(self, r: int) -> list:
        """Elements of length exactly ``r`` sorted by ``key``."""
        raise NotImplementedError

    def validate(self, g) -> Any:
        """Return the canonical form of ``g`` or raise ``UsageError``."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def ball_size(self, r: int) -> int | None:
        return None

    def to_json(self, g) -> Any:
        return g

    def from_json(self, obj) -> Any:
        return self.validate(obj)

    def text(self, g) -> str:
        return str(self.to_json(g))

    # helpers shared by all models

    def descriptor(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def sort_key(self, g):
        return (self.length(g), self.key(g))

    def sorted(self, elems) -> list:
        return sorted(elems, key=self.sort_key)

    def product(self, *elems):
        out = self.identity
        for g in elems:
            out = self.op(out, g)
        return out

    def is_identity(self, g) -> bool:
        return g == self.identity

    def __eq__(self, other):
        return isinstance(other, GroupModel) and self._ident() == other._ident()

    def __hash__(self):
        return hash(self._ident())

    def _ident(self):
        return (self.kind, _freeze(self.params()))

    def __repr__(self):
        return f"{self.kind}({self.params()})"


def _freeze(obj):
    if isinstance(obj, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze(v) for v in obj)
    return obj


def _compositions(total: int, parts: int, caps: Sequence[int | None]) -> Iterator[tuple[int, ...]]:
    """Weak compositions of ``total`` into ``parts`` with optional per-part caps."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    cap = caps[0]
    hi = total if cap is None else min(total, cap)
    for first in range(hi + 1):
        for rest in _compositions(total - first, parts - 1, caps[1:]):
            yield (first,) + rest


class FreeAbelian(GroupModel):
    kind = "FreeAbelian"

    def __init__(self, d: int):
        if not isinstance(d, int) or d < 1:
            raise ConfigError(f"FreeAbelian needs d >= 1, got {d!r}")
        self.d = d
        self.identity = 0 if d == 1 else (0,) * d

    def params(self):
        return {"d": self.d}

    def op(self, g, h):
        if self.d == 1:
            return g + h
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g):
        if self.d == 1:
            return -g
        return tuple(-a for a in g)

    def length(self, g):
        if self.d == 1:
            return abs(g)
        return sum(abs(a) for a in g)

    def key(self, g):
        return g

    def validate(self, g):
        if self.d == 1:
            if isinstance(g, bool) or not isinstance(g, int):
                raise UsageError(f"element of Z must be an int, got {g!r}")
            return g
        if not isinstance(g, (list, tuple)) or len(g) != self.d or not all(
            isinstance(a, int) and not isinstance(a, bool) for a in g
        ):
            raise UsageError(f"element of Z^{self.d} must be {self.d} ints, got {g!r}")
        return tuple(g)

    def to_json(self, g):
        return g if self.d == 1 else list(g)

    def ball_size(self, r):
        return sum(2**k * comb(self.d, k) * comb(r, k) for k in range(min(self.d, r) + 1))

    def sphere(self, r):
        if self.d == 1:
            return [0] if r == 0 else [-r, r]
        out = []
        for comp in _compositions(r, self.d, [None] * self.d):
            nz = [i for i, c in enumerate(comp) if c]
            for signs in itertools.product((-1, 1), repeat=len(nz)):
                v = list(comp)
                for i, s in zip(nz, signs):
                    v[i] *= s
                out.append(tuple(v))
        out.sort()
        return out


class FreeGroup(GroupModel):
    kind = "FreeGroup"

    def __init__(self, k: int):
        if not isinstance(k, int) or not 1 <= k <= 26:
            raise ConfigError(f"FreeGroup needs 1 <= k <= 26, got {k!r}")
        self.k = k
        self.identity = ()

    def params(self):
        return {"k": self.k}

    @staticmethod
    def _letter_key(x: int) -> int:
        return 2 * (abs(x) - 1) + (0 if x > 0 else 1)

    def op(self, g, h):
        out = list(g)
        for x in h:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def inv(self, g):
        return tuple(-x for x in reversed(g))

    def length(self, g):
        return len(g)

    def key(self, g):
        return tuple(self._letter_key(x) for x in g)

    def generator(self, i: int):
        return (i + 1,)

    def validate(self, g):
        if isinstance(g, str):
            return self.parse(g)
        if not isinstance(g, (list, tuple)):
            raise UsageError(f"free group element must be a word, got {g!r}")
        word = tuple(g)
        for x in word:
            if not isinstance(x, int) or x == 0 or abs(x) > self.k:
                raise UsageError(f"bad letter {x!r} for F_{self.k}")
        return self.op((), word)

    def parse(self, s: str):
        if s in ("", "e"):
            return ()
        word = []
        for ch in s:
            idx = string.ascii_lowercase.find(ch.lower())
            if idx < 0 or idx >= self.k:
                raise UsageError(f"bad letter {ch!r} for F_{self.k}")
            word.append(idx + 1 if ch.islower() else -(idx + 1))
        return self.op((), tuple(word))

    def to_json(self, g):
        return "".join(
            string.ascii_lowercase[x - 1] if x > 0 else string.ascii_uppercase[-x - 1] for x in g
        )

    def text(self, g):
        return self.to_json(g) or "e"

    def from_json(self, obj):
        return self.validate(obj)

    def ball_size(self, r):
        return 1 + sum(2 * self.k * (2 * self.k - 1) ** (i - 1) for i in range(1, r + 1))

    def sphere(self, r):
        if r == 0:
            return [()]
        letters = sorted([i for i in range(1, self.k + 1)] + [-i for i in range(1, self.k + 1)],
                         key=self._letter_key)
        level = [()]
        for _ in range(r):
            level = [w + (x,) for w in level for x in letters if not (w and w[-1] == -x)]
        return level  # already sorted: letters are appended in key order


class RestrictedDirectSum(GroupModel):
    """Finitely many Z or Z_m components; length is the sum of coordinate lengths."""

    kind = "RestrictedDirectSum"

    def __init__(self, components: Sequence):
        comps = []
        for c in components:
            if c in ("Z", 0):
                comps.append(0)
            elif isinstance(c, str) and c.startswith("Z_"):
                comps.append(int(c[2:]))
            elif isinstance(c, int) and c >= 2:
                comps.append(c)
            else:
                raise ConfigError(f"bad component {c!r}; use 'Z' or 'Z_m' with m >= 2")
            if comps[-1] == 1:
                raise ConfigError("trivial component Z_1 not allowed")
        if not comps:
            raise ConfigError("RestrictedDirectSum needs a nonempty component list")
        self.moduli = tuple(comps)
        self.identity = (0,) * len(comps)

    @property
    def n(self):
        return len(self.moduli)

    def params(self):
        return {"components": ["Z" if m == 0 else f"Z_{m}" for m in self.moduli]}

    def op(self, g, h):
        return tuple((a + b) % m if m else a + b for a, b, m in zip(g, h, self.moduli))

    def inv(self, g):
        return tuple((-a) % m if m else -a for a, m in zip(g, self.moduli))

    def coord_length(self, a, m):
        return min(a, m - a) if m else abs(a)

    def length(self, g):
        return sum(self.coord_length(a, m) for a, m in zip(g, self.moduli))

    def key(self, g):
        return g

    def validate(self, g):
        if not isinstance(g, (list, tuple)) or len(g) != self.n:
            raise UsageError(f"element must have {self.n} coordinates, got {g!r}")
        out = []
        for a, m in zip(g, self.moduli):
            if not isinstance(a, int) or isinstance(a, bool):
                raise UsageError(f"coordinates must be ints, got {g!r}")
            out.append(a % m if m else a)
        return tuple(out)

    def to_json(self, g):
        return list(g)

    def _coord_values(self, m, ell):
        if m == 0:
            return [0] if ell == 0 else [-ell, ell]
        vals = {a for a in (ell % m, (-ell) % m) if self.coord_length(a, m) == ell}
        return sorted(vals)

    def sphere(self, r):
        caps = [None if m == 0 else m // 2 for m in self.moduli]
        out = []
        for comp in _compositions(r, self.n, caps):
            choices = [self._coord_values(m, ell) for m, ell in zip(self.moduli, comp)]
            out.extend(itertools.product(*choices))
        out.sort()
        return out


def support(G: GroupModel, g) -> list[int]:
    """Ascending coordinate indices where ``g`` differs from the identity."""
    if not isinstance(G, RestrictedDirectSum):
        raise UsageError("support is defined only for RestrictedDirectSum models")
    return [i for i, a in enumerate(g) if a != 0]


class FiniteGroup(GroupModel):
    """A group given by its Cayley table; every non-identity element has length 1."""

    kind = "FiniteGroup"

    def __init__(self, table: Sequence[Sequence[int]]):
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise ConfigError("table must be a nonempty square")
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        for row in self.table:
            if sorted(row) != list(range(n)):
                raise ConfigError("table rows must be permutations of range(n)")
        ident = [e for e in range(n) if list(self.table[e]) == list(range(n))
                 and all(self.table[x][e] == x for x in range(n))]
        if not ident:
            raise ConfigError("table has no identity")
        self.identity = ident[0]
        for a in range(n):
            for b in range(n):
                ab = self.table[a][b]
                for c in range(n):
                    if self.table[ab][c] != self.table[a][self.table[b][c]]:
                        raise ConfigError("table is not associative")
        self._inv = tuple(next(b for b in range(n) if self.table[a][b] == self.identity)
                          for a in range(n))

    def params(self):
        return {"table": [list(r) for r in self.table]}

    def op(self, g, h):
        return self.table[g][h]

    def inv(self, g):
        return self._inv[g]

    def length(self, g):
        return 0 if g == self.identity else 1

    def key(self, g):
        return g

    def validate(self, g):
        if not isinstance(g, int) or not 0 <= g < len(self.table):
            raise UsageError(f"element must be in range({len(self.table)}), got {g!r}")
        return g

    def ball_size(self, r):
        return 1 if r == 0 else len(self.table)

    def sphere(self, r):
        if r == 0:
            return [self.identity]
        if r == 1:
            return [g for g in range(len(self.table)) if g != self.identity]
        return []


_KINDS = {
    "FreeAbelian": lambda p: FreeAbelian(p.get("d", 1)),
    "FreeGroup": lambda p: FreeGroup(p.get("k", 2)),
    "RestrictedDirectSum": lambda p: RestrictedDirectSum(p.get("components", [])),
    "FiniteGroup": lambda p: FiniteGroup(p.get("table", [])),
}


_GROUP_CACHE: dict = {}


def make_group(kind: str, params: dict | None = None) -> GroupModel:
    params = params or {}
    if kind not in _KINDS:
        raise ConfigError(f"unknown group kind {kind!r}")
    if not isinstance(params, dict):
        raise ConfigError("group params must be an object")
    key = (kind, _freeze(params))
    if key not in _GROUP_CACHE:
        _GROUP_CACHE[key] = _KINDS[kind](params)
    return _GROUP_CACHE[key]


def group_from_descriptor(desc: dict) -> GroupModel:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"group descriptor needs a 'kind': {desc!r}")
    return make_group(desc["kind"], desc.get("params") or {})


def Z() -> FreeAbelian:
    return make_group("FreeAbelian", {"d": 1})


def is_integers(G: GroupModel) -> bool:
    return isinstance(G, FreeAbelian) and G.d == 1


@functools.lru_cache(maxsize=256)
def _ball_cached(G: GroupModel, r: int) -> tuple:
    budget = element_budget()
    known = G.ball_size(r)
    if known is not None and known > budget:
        raise ResourceError(f"ball of radius {r} has {known} elements, over the element budget {budget} ({BUDGET_ENV})")
    out: list = []
    for i in range(r + 1):
        out.extend(G.sphere(i))
        if len(out) > budget:
            raise ResourceError(f"ball of radius {r} exceeds the element budget {budget} ({BUDGET_ENV})")
    return tuple(out)


def ball(G: GroupModel, r: int) -> tuple:
    """All elements of length <= r, ordered by (length, canonical key)."""
    if r < 0:
        raise ConfigError("ball radius must be >= 0")
    return _ball_cached(G, r)


def sphere(G: GroupModel, r: int) -> list:
    return G.sphere(r) if r >= 0 else []
