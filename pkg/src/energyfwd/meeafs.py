"""Energy-weighted exporter election with a load-threshold veto (MEEAFS).

Bridges whose line cards draw the least energy export their trees to their
neighbours. Arcs freed by the imported trees are switched off unless they
carried more than ``threshold * capacity`` before pruning, and the network
is then re-routed over the surviving arcs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .pruning import (
    Candidates,
    Mspt,
    PruneResult,
    RoleAssignment,
    collect_candidates,
    connectivity_guard,
    finalize,
    greedy_election,
    import_tree,
    reroot_at_neighbor,
)
from .routing import CostMetric, SptTree, all_shortest_path_trees
from .topology import ArcKey, Topology, incident_energy
from .traffic import DemandSet, LoadMap, route_demands

__all__ = [
    "MeeafsConfig",
    "MeeafsPlan",
    "Mspt",
    "bridge_weight",
    "elect_exporters_by_energy",
    "import_tree",
    "reroot_at_neighbor",
    "run_meeafs",
]


@dataclass(frozen=True)
class MeeafsConfig:
    threshold: float = 1.0  # fraction of arc capacity
    mu: float = 1.0

    def __post_init__(self):
        if not 0 <= self.threshold <= 1:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if not 0 < self.mu <= 1:
            raise ValueError(f"mu must lie in (0, 1], got {self.mu}")


def bridge_weight(topology: Topology, node: int) -> float:
    """Power weight of a bridge: one line card per outgoing arc."""
    return incident_energy(topology, node)


def elect_exporters_by_energy(topology: Topology) -> RoleAssignment:
    weights = [bridge_weight(topology, i) for i in range(topology.node_count)]
    ranking = sorted(range(topology.node_count), key=lambda i: (weights[i], i))
    return greedy_election(topology, ranking, strand_as_neutral=False)


@dataclass
class MeeafsPlan:
    """Everything MEEAFS computes before the threshold is applied.

    Build once per (topology, demands) and call :meth:`run` for each
    threshold; identical residual arc sets are routed only once.
    """

    topology: Topology
    demands: DemandSet
    arc_cost: CostMetric
    trees: Mapping[int, SptTree]
    baseline_loads: LoadMap
    roles: RoleAssignment
    candidates: Candidates
    _memo: dict[frozenset[ArcKey], PruneResult] = field(default_factory=dict, repr=False)

    @classmethod
    def prepare(
        cls,
        topology: Topology,
        demands: DemandSet,
        arc_cost: CostMetric = "energy",
        trees: Mapping[int, SptTree] | None = None,
    ) -> "MeeafsPlan":
        if trees is None:
            trees = all_shortest_path_trees(topology, arc_cost)
        baseline = route_demands(topology, None, demands, arc_cost, trees)
        roles = elect_exporters_by_energy(topology)
        cand = collect_candidates(topology, trees, roles)
        return cls(topology, demands, arc_cost, trees, baseline, roles, cand)

    def switch_off(self, threshold: float) -> set[ArcKey]:
        """Candidates that survive the load veto and the connectivity guard."""
        load = self.baseline_loads.load
        arc = self.topology.arc
        light = [k for k in self.candidates.off if load[k] <= threshold * arc(*k).capacity]
        return connectivity_guard(self.topology, light)

    def run(self, config: MeeafsConfig) -> PruneResult:
        off = frozenset(self.switch_off(config.threshold))
        hit = self._memo.get(off)
        if hit is None:
            hit = finalize(
                self.topology,
                off,
                self.roles,
                self.candidates.adopted,
                self.candidates.off,
                self.arc_cost,
                self.demands,
                self.baseline_loads,
            )
            self._memo[off] = hit
        return hit


def run_meeafs(
    topology: Topology,
    demands: DemandSet,
    config: MeeafsConfig,
    arc_cost: CostMetric = "energy",
) -> PruneResult:
    return MeeafsPlan.prepare(topology, demands, arc_cost).run(config)
