"""Arithmetic over a balanced b-ary tree whose leaves are individuals.

Nothing is stored: a leaf id written in base ``b`` with ``h`` digits (most
significant first) is its root-to-leaf path. Leaves sit at level 0, so two
siblings are at distance 1 and leaves on opposite sides of the root are at
distance ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class TreeParams:
    b: int
    h: int

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise ValueError(f"fanout b must be an integer >= 2, got {self.b!r}")
        if int(self.h) != self.h or self.h < 1:
            raise ValueError(f"height h must be an integer >= 1, got {self.h!r}")
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "h", int(self.h))
        if self.b**self.h > INT64_MAX:
            raise OverflowError(f"b^h = {self.b}^{self.h} does not fit in a signed 64-bit integer")

    @classmethod
    def from_population(cls, n: int, b: int) -> "TreeParams":
        """Build the tree with fanout ``b`` holding exactly ``n`` leaves."""
        if b < 2:
            raise ValueError(f"fanout b must be >= 2, got {b}")
        h, m = 0, 1
        while m < n:
            m *= b
            h += 1
        if m != n or h < 1:
            raise ValueError(f"n = {n} is not a positive power of b = {b}")
        return cls(b, h)

    @property
    def n(self) -> int:
        return self.b**self.h

    @property
    def N(self) -> int:
        return self.b ** (self.h - 1)

    @property
    def H(self) -> int:
        return self.h - 1


def _check_id(x, size, what):
    if int(x) != x or not 0 <= x < size:
        raise ValueError(f"{what} {x!r} out of range [0, {size})")
    return int(x)


def _lca_height(u: int, v: int, b: int) -> int:
    # number of trailing digits that must be stripped before u and v agree
    d = 0
    while u != v:
        u //= b
        v //= b
        d += 1
    return d


def social_distance(u: int, v: int, p: TreeParams) -> int:
    """Height of the lowest common ancestor of leaves ``u`` and ``v``."""
    u = _check_id(u, p.n, "node")
    v = _check_id(v, p.n, "node")
    return _lca_height(u, v, p.b)


def community_of(u: int, p: TreeParams) -> int:
    return _check_id(u, p.n, "node") // p.b


def community_distance(c1: int, c2: int, p: TreeParams) -> int:
    """Distance between two communities on the community tree (height ``H``)."""
    c1 = _check_id(c1, p.N, "community")
    c2 = _check_id(c2, p.N, "community")
    return _lca_height(c1, c2, p.b)


def community_distance_array(cs, target: int, b: int, H: int) -> np.ndarray:
    """Vectorised ``community_distance`` from each id in ``cs`` to ``target``.

    No range checks; callers pass ids they already trust.
    """
    cs = np.asarray(cs, dtype=np.int64)
    powers = _powers(b, H)
    same = (cs[..., None] // powers) == (int(target) // powers)
    # same[..., H] is always True: every pair meets at the root
    return np.argmax(same, axis=-1)


@lru_cache(maxsize=128)
def _powers(b: int, H: int) -> np.ndarray:
    p = np.array([b**k for k in range(H + 1)], dtype=np.int64)
    p.flags.writeable = False
    return p


def communities_at_distance(c: int, d: int, p: TreeParams) -> list[int]:
    """All communities exactly ``d`` levels away from ``c``, in increasing order.

    These are the communities sharing ``c``'s top ``H - d`` digits whose digit
    at position ``d - 1`` (counting from the least significant) differs.
    """
    c = _check_id(c, p.N, "community")
    if int(d) != d or not 1 <= d <= p.H:
        raise ValueError(f"distance {d!r} out of range [1, {p.H}]")
    b = p.b
    low = b ** (d - 1)
    base = (c // (low * b)) * (low * b)
    own = (c // low) % b
    out = []
    for digit in range(b):
        if digit == own:
            continue
        start = base + digit * low
        out.extend(range(start, start + low))
    return out


def count_at_distance(d: int, b: int) -> int:
    return (b - 1) * b ** (d - 1)
