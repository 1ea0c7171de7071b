"""Hierarchical community networks: generation, greedy search and cost model."""

from hiersearch.hierarchy import (
    TreeParams,
    communities_at_distance,
    community_distance,
    community_of,
    social_distance,
)
from hiersearch.netgen import CommunityGraph, GraphParams, generate, link_distance_pmf
from hiersearch.costmodel import CostBreakdown, CostParams, OptimumReport, objective, optimal_fanout
from hiersearch.simulate import RoutingConfig, SearchOutcome, TrialStats, greedy_route, run_trials

__all__ = [
    "TreeParams",
    "social_distance",
    "community_of",
    "community_distance",
    "communities_at_distance",
    "GraphParams",
    "CommunityGraph",
    "generate",
    "link_distance_pmf",
    "CostParams",
    "CostBreakdown",
    "OptimumReport",
    "objective",
    "optimal_fanout",
    "RoutingConfig",
    "SearchOutcome",
    "TrialStats",
    "greedy_route",
    "run_trials",
]
