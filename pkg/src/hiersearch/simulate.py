"""Decentralised greedy routing over a community graph.

A message at community ``cur`` heading for ``dst`` looks only at ``cur``'s
own out-links and forwards to whichever is closest to ``dst`` in the
community tree. Routing never sees the rest of the graph.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from hiersearch import streams
from hiersearch.costmodel import CostParams
from hiersearch.hierarchy import _check_id, community_distance_array
from hiersearch.netgen import CommunityGraph

FALLBACKS = ("random-neighbor", "fail-fast")
TRIAL_FIELDS = ("trial_id", "src", "dst", "inter_hops", "success", "fallback_steps", "modeled_time")


def default_hop_budget(N: int) -> int:
    if N <= 1:
        return 64
    return max(64, 4 * math.ceil(math.log2(N) ** 2 - 1e-9))


@dataclass(frozen=True)
class RoutingConfig:
    hop_budget: int | None = None  # None: default_hop_budget(N)
    fallback: str = "random-neighbor"
    per_hop_local: bool = False  # charge t_local at every visited community, not just the two ends

    def __post_init__(self):
        if self.hop_budget is not None and (int(self.hop_budget) != self.hop_budget or self.hop_budget < 1):
            raise ValueError(f"hop_budget must be a positive integer, got {self.hop_budget!r}")
        if self.fallback not in FALLBACKS:
            raise ValueError(f"fallback must be one of {FALLBACKS}, got {self.fallback!r}")

    def budget_for(self, N: int) -> int:
        return default_hop_budget(N) if self.hop_budget is None else int(self.hop_budget)


@dataclass(frozen=True)
class SearchOutcome:
    inter_hops: int
    success: bool
    fallback_steps: int
    modeled_time: float


def greedy_route(
    g: CommunityGraph,
    src: int,
    dst: int,
    cfg: RoutingConfig = RoutingConfig(),
    rng: np.random.Generator | None = None,
    cost: CostParams = CostParams(),
) -> SearchOutcome:
    """Route one message from ``src`` to ``dst``.

    Each step forwards to the out-neighbour with the smallest community
    distance to ``dst``, lowest id on ties. If none is strictly closer than
    the current community, the fallback applies: ``fail-fast`` gives up,
    ``random-neighbor`` forwards to a uniformly random out-neighbour.
    """
    tree = g.tree
    src = _check_id(src, tree.N, "community")
    dst = _check_id(dst, tree.N, "community")
    budget = cfg.budget_for(tree.N)
    b, H = tree.b, tree.H

    cur, hops, fallback_steps = src, 0, 0
    d_cur = int(community_distance_array([cur], dst, b, H)[0])
    success = True
    while cur != dst:
        nb = g.neighbors(cur)
        if hops >= budget or len(nb) == 0:
            success = False
            break
        ds = community_distance_array(nb, dst, b, H)
        d_min = int(ds.min())
        if d_min < d_cur:
            nxt = int(nb[ds == d_min].min())
            d_cur = d_min
        elif cfg.fallback == "fail-fast":
            success = False
            break
        else:
            if rng is None:
                raise ValueError("random-neighbor fallback needs an rng")
            nxt = int(nb[rng.integers(len(nb))])
            d_cur = int(community_distance_array([nxt], dst, b, H)[0])
            fallback_steps += 1
        cur = nxt
        hops += 1

    t_local = cost.kappa3 * b**cost.omega
    local_charges = hops + 1 if cfg.per_hop_local else 2
    return SearchOutcome(hops, success, fallback_steps, hops * 1.0 + local_charges * t_local)


@dataclass
class Moments:
    """Running count/mean/M2 that can be merged in any order."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "Moments") -> "Moments":
        n = self.count + other.count
        if n == 0:
            return Moments()
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return Moments(n, mean, m2)

    @property
    def std(self) -> float:
        return math.sqrt(self.m2 / (self.count - 1)) if self.count > 1 else 0.0


@dataclass(frozen=True)
class TrialStats:
    trials: int
    successes: int
    mean_hops: float
    std_hops: float
    p50: float
    p95: float
    failure_rate: float

    def ci95(self) -> tuple[float, float]:
        """Normal-approximation 95% interval for ``mean_hops``."""
        half = 1.96 * self.std_hops / math.sqrt(self.successes) if self.successes else math.nan
        return self.mean_hops - half, self.mean_hops + half


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    src: int
    dst: int
    outcome: SearchOutcome = field(repr=False)

    def row(self):
        o = self.outcome
        return (self.trial_id, self.src, self.dst, o.inter_hops, int(o.success), o.fallback_steps, repr(o.modeled_time))


def _one_trial(g, i, cfg, seed, cost):
    rng = streams.stream(seed, streams.TRIALS, i)
    N = g.N
    src = int(rng.integers(N))
    dst = int(rng.integers(N))
    while dst == src:
        dst = int(rng.integers(N))
    return TrialRecord(i, src, dst, greedy_route(g, src, dst, cfg, rng, cost))


def simulate_trials(g: CommunityGraph, R: int, cfg: RoutingConfig = RoutingConfig(), seed: int = 0,
                    cost: CostParams = CostParams(), start: int = 0) -> list[TrialRecord]:
    """Trials ``start .. start+R-1``. Trial ``i`` depends only on ``(seed, i)``."""
    if int(R) != R or R < 1:
        raise ValueError(f"number of trials must be >= 1, got {R!r}")
    if g.N < 2:
        raise ValueError("need at least two communities to pick src != dst")
    return [_one_trial(g, i, cfg, seed, cost) for i in range(start, start + R)]


def summarize(records) -> TrialStats:
    m = Moments()
    hops = []
    failures = 0
    for r in records:
        if r.outcome.success:
            m.add(r.outcome.inter_hops)
            hops.append(r.outcome.inter_hops)
        else:
            failures += 1
    total = m.count + failures
    if not total:
        raise ValueError("no trials to summarize")
    if hops:
        p50, p95 = (float(x) for x in np.percentile(hops, [50, 95]))
        mean, std = m.mean, m.std
    else:
        p50 = p95 = mean = std = math.nan
    return TrialStats(total, m.count, mean, std, p50, p95, failures / total)


def run_trials(g: CommunityGraph, R: int, cfg: RoutingConfig = RoutingConfig(), seed: int = 0,
               cost: CostParams = CostParams()) -> TrialStats:
    """Monte Carlo over ``R`` uniformly drawn ordered pairs with ``src != dst``."""
    return summarize(simulate_trials(g, R, cfg, seed, cost))


def write_trials_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_FIELDS)
        for r in records:
            w.writerow(r.row())


def exhaustive_mean_hops(g: CommunityGraph, cfg: RoutingConfig = RoutingConfig()) -> float:
    """Mean greedy hops over every ordered pair ``src != dst``, routed fail-fast.

    Averages over successful pairs, matching ``TrialStats.mean_hops``; ``nan``
    if no pair succeeds. Only meant as a test oracle, so ``N <= 256``.
    """
    N = g.N
    if N > 256:
        raise ValueError(f"exhaustive oracle limited to N <= 256, got N = {N}")
    if N < 2:
        raise ValueError("need at least two communities")
    det = RoutingConfig(cfg.hop_budget, "fail-fast", cfg.per_hop_local)
    total, ok = 0, 0
    for s in range(N):
        for t in range(N):
            if s == t:
                continue
            o = greedy_route(g, s, t, det)
            if o.success:
                total += o.inter_hops
                ok += 1
    return total / ok if ok else math.nan


def bfs_shortest_hops(g: CommunityGraph, src: int, dst: int) -> int | None:
    """Fewest out-link hops from ``src`` to ``dst``; ``None`` if unreachable."""
    src = _check_id(src, g.N, "community")
    dst = _check_id(dst, g.N, "community")
    if src == dst:
        return 0
    seen = {src}
    frontier = deque([(src, 0)])
    while frontier:
        c, d = frontier.popleft()
        for x in g.neighbors(c):
            x = int(x)
            if x == dst:
                return d + 1
            if x not in seen:
                seen.add(x)
                frontier.append((x, d + 1))
    return None
