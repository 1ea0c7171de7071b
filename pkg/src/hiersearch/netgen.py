"""Random community-level graphs with distance-decaying out-links.

Communities are the vertices. Each one draws ``min(k_target, N - 1)`` distinct
out-neighbours; a neighbour at community distance ``d`` is chosen with weight
``b ** (-beta * d)``. The clique inside a community is implicit.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hiersearch import streams
from hiersearch.hierarchy import (
    TreeParams,
    _check_id,
    communities_at_distance,
    community_distance_array,
)

MAX_DRAW_FACTOR = 64


@dataclass(frozen=True)
class GraphParams:
    tree: TreeParams
    beta: float = 1.0
    degree_coeff: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta!r}")
        if not self.degree_coeff > 0:
            raise ValueError(f"degree_coeff must be > 0, got {self.degree_coeff!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


def target_degree(N: int, degree_coeff: float) -> int:
    """``ceil(c_k * (log2 N)^2)``, at least 1."""
    if N <= 1:
        return 1
    x = degree_coeff * math.log2(N) ** 2
    # absorb float noise so that e.g. log2(27)^2 * 1 does not round up past an integer
    return max(1, math.ceil(x - 1e-9 * max(1.0, x)))


def link_distance_pmf(g: GraphParams) -> np.ndarray:
    """Probability that a sampled link spans distance ``d``; entry ``d - 1``.

    Weight of distance ``d`` is ``(b-1) b^(d-1) * b^(-beta d)``: the number of
    communities at that distance times the per-community link weight.
    """
    b, H = g.tree.b, g.tree.H
    if H < 1:
        raise ValueError("a single community has no inter-community links")
    d = np.arange(1, H + 1, dtype=float)
    logw = math.log(b - 1) + ((1.0 - g.beta) * d - 1.0) * math.log(b)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def normalizer(g: GraphParams) -> float:
    """Sum of ``b^(-beta d(c, c'))`` over all ``c' != c``, by levels."""
    b, H = g.tree.b, g.tree.H
    return sum((b - 1) * b ** (d - 1) * b ** (-g.beta * d) for d in range(1, H + 1))


@lru_cache(maxsize=64)
def _distance_cdf(g: GraphParams) -> np.ndarray:
    cdf = np.cumsum(link_distance_pmf(g))
    cdf.flags.writeable = False
    return cdf


def sample_neighbors(c: int, g: GraphParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` independent neighbours of community ``c`` (with repeats).

    First a distance from :func:`link_distance_pmf`, then a uniform member of
    the communities at that distance, built digit by digit.
    """
    p = g.tree
    c = _check_id(c, p.N, "community")
    if p.N < 2:
        raise ValueError("need at least two communities to sample a neighbour")
    b = p.b
    cdf = _distance_cdf(g)
    d = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right") + 1
    d = np.minimum(d, p.H)
    low = np.asarray(b, dtype=np.int64) ** (d - 1)
    block = low * b
    own = (c // low) % b
    r = rng.integers(0, b - 1, size=size)
    digit = r + (r >= own)
    lower = rng.integers(0, low)
    return (c // block) * block + digit * low + lower


def sample_neighbor(c: int, g: GraphParams, rng: np.random.Generator) -> int:
    return int(sample_neighbors(c, g, rng, 1)[0])


class CommunityGraph:
    """Directed out-links between communities. Treat as read-only once built."""

    def __init__(self, params: GraphParams, out_links, k_target: int):
        self.params = params
        self.out_links = [np.asarray(x, dtype=np.int64) for x in out_links]
        self.k_target = k_target

    @property
    def tree(self) -> TreeParams:
        return self.params.tree

    @property
    def N(self) -> int:
        return self.params.tree.N

    def neighbors(self, c: int) -> np.ndarray:
        return self.out_links[c]

    def __eq__(self, other):
        if not isinstance(other, CommunityGraph):
            return NotImplemented
        return (
            self.params == other.params
            and self.k_target == other.k_target
            and len(self.out_links) == len(other.out_links)
            and all(np.array_equal(a, o) for a, o in zip(self.out_links, other.out_links))
        )

    def __repr__(self):
        return f"CommunityGraph(N={self.N}, k_target={self.k_target}, params={self.params})"


def _exhaustive_choice(c: int, m: int, g: GraphParams, rng: np.random.Generator) -> np.ndarray:
    p = g.tree
    cands = np.delete(np.arange(p.N, dtype=np.int64), c)
    d = community_distance_array(cands, c, p.b, p.H)
    # weighted sampling without replacement: top-m of u^(1/w) (Efraimidis-Spirakis), in log form
    log_w = -g.beta * math.log(p.b) * (d - d.min())
    keys = np.log(rng.random(len(cands))) * np.exp(-log_w)
    order = np.argsort(-keys, kind="stable")[:m]
    return cands[order]


def _community_links(c: int, m: int, k_target: int, g: GraphParams) -> np.ndarray:
    rng = streams.stream(g.seed, streams.GRAPH, c)
    if m == 0:
        return np.empty(0, dtype=np.int64)
    pool = np.empty(0, dtype=np.int64)
    drawn = 0
    cap = MAX_DRAW_FACTOR * k_target
    while True:
        uniq, first = np.unique(pool, return_index=True)
        if len(uniq) >= m:
            return pool[np.sort(first)[:m]]
        if drawn >= cap:
            return _exhaustive_choice(c, m, g, rng)
        need = m - len(uniq)
        batch = min(cap - drawn, max(2 * need + 8, drawn))
        pool = np.concatenate([pool, sample_neighbors(c, g, rng, batch)])
        drawn += batch


def generate(g: GraphParams) -> CommunityGraph:
    """Build the community graph for ``g``.

    Community ``c`` uses its own stream keyed by ``(seed, c)``, so the result
    does not depend on the order communities are built in. Duplicates are
    rejected; if rejection needs more than ``64 * k_target`` draws the
    community falls back to weighted selection without replacement.
    """
    N = g.tree.N
    k = target_degree(N, g.degree_coeff)
    m = min(k, N - 1)
    links = [_community_links(c, m, k, g) for c in range(N)]
    return CommunityGraph(g, links, k)


def format_graph(graph: CommunityGraph) -> str:
    """Header line with the generation parameters, then ``c: n1 n2 ...`` per community."""
    p = graph.params
    lines = [
        f"# b={p.tree.b} h={p.tree.h} beta={float(p.beta)!r} c_k={float(p.degree_coeff)!r} "
        f"seed={p.seed} k_target={graph.k_target}"
    ]
    for c, nb in enumerate(graph.out_links):
        lines.append(f"{c}: " + " ".join(str(int(x)) for x in nb) if len(nb) else f"{c}:")
    return "\n".join(lines) + "\n"


def write_graph(graph: CommunityGraph, path) -> None:
    Path(path).write_text(format_graph(graph))


def read_graph(path) -> CommunityGraph:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{path}: missing header line")
    fields = dict(item.split("=", 1) for item in text[0][1:].split())
    try:
        tree = TreeParams(int(fields["b"]), int(fields["h"]))
        params = GraphParams(tree, float(fields["beta"]), float(fields["c_k"]), int(fields["seed"]))
    except KeyError as e:
        raise ValueError(f"{path}: header lacks {e.args[0]}") from None
    k_target = int(fields.get("k_target", target_degree(tree.N, params.degree_coeff)))
    links = [None] * tree.N
    for line in text[1:]:
        if not line.strip():
            continue
        head, _, rest = line.partition(":")
        c = int(head)
        if not 0 <= c < tree.N or links[c] is not None:
            raise ValueError(f"{path}: bad or repeated community id {c}")
        links[c] = [int(x) for x in rest.split()]
    missing = [c for c, x in enumerate(links) if x is None]
    if missing:
        raise ValueError(f"{path}: no line for communities {missing[:5]}")
    return CommunityGraph(params, links, k_target)


def link_distances(graph: CommunityGraph) -> np.ndarray:
    """Distance of every link in the graph, flattened."""
    p = graph.tree
    out = [community_distance_array(nb, c, p.b, p.H) for c, nb in enumerate(graph.out_links)]
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


__all__ = [
    "GraphParams",
    "CommunityGraph",
    "target_degree",
    "link_distance_pmf",
    "normalizer",
    "sample_neighbor",
    "sample_neighbors",
    "generate",
    "format_graph",
    "write_graph",
    "read_graph",
    "link_distances",
    "communities_at_distance",
]
