"""Degree-based EAR baseline.

Exporters are the best-connected bridges. Importers adopt their exporter's
tree, arcs nobody uses any more go to sleep, and every bridge recomputes
its tree on what is left. Traffic plays no part in the decision.
"""

from __future__ import annotations

from typing import Mapping

from .pruning import (
    PruneResult,
    RoleAssignment,
    collect_candidates,
    connectivity_guard,
    finalize,
    greedy_election,
)
from .routing import CostMetric, SptTree, all_shortest_path_trees
from .topology import Topology

__all__ = ["PruneResult", "RoleAssignment", "elect_exporters_by_degree", "run_ear"]


def elect_exporters_by_degree(topology: Topology) -> RoleAssignment:
    ranking = sorted(range(topology.node_count), key=lambda i: (-topology.degree(i), i))
    return greedy_election(topology, ranking, strand_as_neutral=True)


def run_ear(
    topology: Topology,
    arc_cost: CostMetric = "energy",
    trees: Mapping[int, SptTree] | None = None,
) -> PruneResult:
    """Prune ``topology`` with EAR; ``trees`` may pass in precomputed own trees."""
    if trees is None:
        trees = all_shortest_path_trees(topology, arc_cost)
    roles = elect_exporters_by_degree(topology)
    cand = collect_candidates(topology, trees, roles)
    off = connectivity_guard(topology, cand.off)
    return finalize(topology, off, roles, cand.adopted, cand.off, arc_cost, demands=None)
