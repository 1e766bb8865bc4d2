"""Exact nonnegative integers too large to hold as binary.

A value is either a plain ``int`` (below ``2**LIMIT``) or a :class:`Sparse`
number: a finite set of bit positions, each position again a value.  This
is enough to build and check towers such as ``a + 2**a`` where ``a`` itself
has thousands of bits.
"""

from __future__ import annotations

from functools import cmp_to_key
from typing import Iterable, Union

LIMIT = 1 << 16


class Sparse:
    __slots__ = ("exps", "_hash")

    def __init__(self, exps: Iterable["Value"]):
        self.exps = tuple(sorted(set(exps), key=_KEY, reverse=True))
        self._hash = hash(self.exps)

    def __eq__(self, other):
        return isinstance(other, Sparse) and self.exps == other.exps

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Sparse(" + ", ".join(map(repr, self.exps)) + ")"


Value = Union[int, Sparse]


def _bits_of_int(x: int) -> list[int]:
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def bits(x: Value) -> tuple:
    """Bit positions of ``x`` (descending)."""
    if isinstance(x, int):
        return tuple(reversed(_bits_of_int(x)))
    return x.exps


def normalize(exps: Iterable[Value]) -> Value:
    exps = list(exps)
    if all(isinstance(e, int) and e < LIMIT for e in exps):
        return sum(1 << e for e in set(exps))
    return Sparse(exps)


def from_int(x: int) -> Value:
    if x < 0:
        raise ValueError("only nonnegative values")
    return x if x.bit_length() <= LIMIT else Sparse(_bits_of_int(x))


def cmp(x: Value, y: Value) -> int:
    if isinstance(x, int) and isinstance(y, int):
        return (x > y) - (x < y)
    if isinstance(x, int):
        return -1
    if isinstance(y, int):
        return 1
    for a, b in zip(x.exps, y.exps):
        c = cmp(a, b)
        if c:
            return c
    return (len(x.exps) > len(y.exps)) - (len(x.exps) < len(y.exps))


_KEY = cmp_to_key(cmp)


def lt(x: Value, y: Value) -> bool:
    return cmp(x, y) < 0


def add_pow2(x: Value, e: Value) -> Value:
    """``x + 2**e`` with carries."""
    if isinstance(x, int) and isinstance(e, int) and e < LIMIT:
        return from_int(x + (1 << e))
    exps = set(bits(x))
    while e in exps:
        exps.remove(e)
        e = add(e, 1)
    exps.add(e)
    return normalize(exps)


def add(x: Value, y: Value) -> Value:
    if isinstance(x, int) and isinstance(y, int):
        return from_int(x + y)
    out = x
    for e in bits(y):
        out = add_pow2(out, e)
    return out


def shift_mul(t: int, e: Value) -> Value:
    """``t * 2**e`` for a small positive ``t``."""
    out: Value = 0
    for j in _bits_of_int(t):
        out = add_pow2(out, add(e, j))
    return out


def v2(x: Value) -> Value:
    """2-adic valuation of a positive value."""
    if isinstance(x, int):
        if x <= 0:
            raise ValueError("v2 of a nonpositive value")
        return (x & -x).bit_length() - 1
    return x.exps[-1]


def to_json(x: Value):
    if isinstance(x, int):
        return str(x)
    return {"bits": [to_json(e) for e in x.exps]}


def from_json(obj) -> Value:
    if isinstance(obj, str):
        return from_int(int(obj))
    if isinstance(obj, int):
        return from_int(obj)
    return normalize(from_json(e) for e in obj["bits"])


def describe(x: Value) -> str:
    if isinstance(x, int):
        return str(x) if x.bit_length() <= 64 else f"<{x.bit_length()}-bit integer>"
    return "2^(" + describe(x.exps[0]) + ") + ..."
