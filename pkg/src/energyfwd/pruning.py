"""Machinery shared by EAR and MEEAFS.

Both algorithms split the bridges into exporters, importers and neutrals,
let each importer adopt a copy of its exporter's tree, and switch off arcs
that no tree uses any more. They differ in how exporters are ranked and in
whether traffic load can veto a switch-off.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .routing import CostMetric, SptTree, all_shortest_path_trees, arc_cost, is_strongly_connected, l_min
from .topology import ArcKey, Topology
from .traffic import DemandSet, LoadMap, route_demands


@dataclass(frozen=True)
class RoleAssignment:
    exporters: frozenset[int]
    importers: Mapping[int, int]  # importer -> its exporter
    neutrals: frozenset[int]

    def role_of(self, node: int) -> str:
        if node in self.exporters:
            return "exporter"
        if node in self.importers:
            return "importer"
        if node in self.neutrals:
            return "neutral"
        raise KeyError(node)

    def validate(self, topology: Topology) -> None:
        """Raise ``AssertionError`` if the assignment is not a legal partition."""
        imp = set(self.importers)
        parts = [set(self.exporters), imp, set(self.neutrals)]
        assert sum(len(p) for p in parts) == topology.node_count, "roles overlap or miss bridges"
        assert set().union(*parts) == set(range(topology.node_count)), "roles do not cover all bridges"
        for i, e in self.importers.items():
            assert e in self.exporters, f"importer {i} attached to non-exporter {e}"
            assert topology.has_arc(i, e), f"importer {i} is not adjacent to exporter {e}"
        for e in self.exporters:
            for v in topology.neighbors(e):
                assert v not in self.exporters, f"exporters {e} and {v} are neighbours"


def greedy_election(topology: Topology, ranking: Sequence[int], strand_as_neutral: bool) -> RoleAssignment:
    """Elect exporters by walking ``ranking`` best-first.

    Each still-unassigned bridge becomes an exporter and claims its
    unassigned neighbours as importers. With ``strand_as_neutral`` a bridge
    with no unassigned neighbour left becomes neutral instead.
    """
    assigned: set[int] = set()
    exporters: set[int] = set()
    neutrals: set[int] = set()
    importers: dict[int, int] = {}
    for node in ranking:
        if node in assigned:
            continue
        free = [v for v in topology.neighbors(node) if v not in assigned]
        assigned.add(node)
        if not free and strand_as_neutral:
            neutrals.add(node)
            continue
        exporters.add(node)
        for v in free:
            importers[v] = node
            assigned.add(v)
    return RoleAssignment(frozenset(exporters), dict(sorted(importers.items())), frozenset(neutrals))


@dataclass(frozen=True)
class Mspt:
    """An exporter's tree taken over by an adjacent importer as its own root."""

    importer: int
    exporter: int
    tree: SptTree
    exporter_arcs: frozenset[ArcKey] = field(repr=False)

    @property
    def removed(self) -> set[ArcKey]:
        return set(self.exporter_arcs - self.tree.arc_keys())

    @property
    def added(self) -> set[ArcKey]:
        return self.tree.arc_keys() - self.exporter_arcs

    @property
    def flipped(self) -> bool:
        """True when the only change is reversing the exporter->importer arc."""
        return self.removed == {(self.exporter, self.importer)} and self.added == {
            (self.importer, self.exporter)
        }


def _rehang(topology: Topology, tree: SptTree, new_root: int) -> SptTree:
    # Drop the arc entering new_root, hang the old root below it.
    parent = dict(tree.parent)
    del parent[new_root]
    parent[tree.root] = topology.arc(new_root, tree.root)
    children: dict[int, list[int]] = {v: [] for v in tree.distance}
    for v, a in parent.items():
        children[a.src].append(v)
    distance = {new_root: 0.0}
    queue = deque([new_root])
    while queue:
        u = queue.popleft()
        for v in sorted(children[u]):
            distance[v] = distance[u] + arc_cost(parent[v], tree.metric)
            queue.append(v)
    return SptTree(new_root, parent, distance, tree.metric)


def reroot_at_neighbor(topology: Topology, tree: SptTree, new_root: int) -> Mspt:
    """Make a direct child of the root the new root by reversing their arc."""
    arc = tree.parent.get(new_root)
    if arc is None or arc.src != tree.root:
        raise ValueError(f"bridge {new_root} is not a direct child of root {tree.root} in the tree")
    return Mspt(new_root, tree.root, _rehang(topology, tree, new_root), frozenset(tree.arc_keys()))


def import_tree(topology: Topology, exporter_tree: SptTree, importer: int) -> Mspt:
    """Importer's modified tree built from its exporter's tree.

    When the importer hangs directly below the exporter this is
    :func:`reroot_at_neighbor`. Otherwise the importer's own entering arc is
    replaced by the importer->exporter arc, which keeps the tree property and
    still changes exactly one arc.
    """
    exporter = exporter_tree.root
    if not topology.has_arc(importer, exporter):
        raise ValueError(f"importer {importer} is not adjacent to exporter {exporter}")
    if exporter_tree.parent[importer].src == exporter:
        return reroot_at_neighbor(topology, exporter_tree, importer)
    return Mspt(
        importer, exporter, _rehang(topology, exporter_tree, importer), frozenset(exporter_tree.arc_keys())
    )


@dataclass
class Candidates:
    """Threshold-independent outcome of the tree-import phase."""

    off: list[ArcKey]  # switch-off candidates, in the order they were freed
    adopted: dict[int, Mspt]  # importers that took over their exporter's tree
    floor_hit: bool


def collect_candidates(
    topology: Topology, trees: Mapping[int, SptTree], roles: RoleAssignment
) -> Candidates:
    """Arcs left unused once importers adopt their exporters' trees.

    Arcs outside every shortest-path tree come first, then importers are
    processed in ascending id and the arcs each one frees are appended in
    ascending ``(src, dst)``. Collection stops as soon as only ``2(n-1)``
    arcs would remain on; importers not reached keep their own trees.
    """
    counts: Counter[ArcKey] = Counter()
    for t in trees.values():
        counts.update(t.arc_keys())
    budget = len(topology.arcs) - l_min(topology)
    off: dict[ArcKey, None] = {}

    def take(keys: Iterable[ArcKey]) -> bool:
        for k in sorted(keys):
            if len(off) >= budget:
                return True
            off[k] = None
        return len(off) >= budget

    adopted: dict[int, Mspt] = {}
    hit = take(k for k in topology.arc_keys if counts[k] == 0)
    if not hit:
        for imp in sorted(roles.importers):
            mspt = import_tree(topology, trees[roles.importers[imp]], imp)
            adopted[imp] = mspt
            old = trees[imp].arc_keys()
            new = mspt.tree.arc_keys()
            for k in new:
                counts[k] += 1
                off.pop(k, None)  # an adopted tree may revive an idle arc
            for k in old:
                counts[k] -= 1
            if take(k for k in old if counts[k] == 0):
                hit = True
                break
    return Candidates(list(off), adopted, hit)


def connectivity_guard(topology: Topology, off: Iterable[ArcKey]) -> set[ArcKey]:
    """Drop candidates whose removal would break strong connectivity.

    Candidates are tried in ascending ``(src, dst)``; each stays off only
    if the remaining arcs are still strongly connected.
    """
    off = set(off)
    if is_strongly_connected(topology, topology.arc_keys - off):
        return off
    kept_off: set[ArcKey] = set()
    for k in sorted(off):
        trial = kept_off | {k}
        if is_strongly_connected(topology, topology.arc_keys - trial):
            kept_off = trial
    return kept_off


@dataclass
class PruneResult:
    topology: Topology
    off_arcs: frozenset[ArcKey]
    active_arcs: frozenset[ArcKey]
    residual_routing: dict[int, SptTree]
    final_loads: LoadMap | None
    roles: RoleAssignment
    adopted: dict[int, Mspt]
    candidates: tuple[ArcKey, ...]
    baseline_loads: LoadMap | None = None

    @property
    def energy_on(self) -> float:
        """Energy objective: total energy of the arcs left on."""
        return sum(self.topology.arc(*k).energy for k in sorted(self.active_arcs))

    @property
    def sleeping_links(self) -> int:
        """Physical links with both directions switched off."""
        return sum(1 for (u, v) in self.off_arcs if u < v and (v, u) in self.off_arcs)


def finalize(
    topology: Topology,
    off: Iterable[ArcKey],
    roles: RoleAssignment,
    adopted: dict[int, Mspt],
    candidates: Sequence[ArcKey],
    arc_cost: CostMetric,
    demands: DemandSet | None,
    baseline_loads: LoadMap | None = None,
) -> PruneResult:
    """Recompute every bridge's tree on the residual arcs and route traffic there."""
    off = frozenset(off)
    active = topology.arc_keys - off
    trees = all_shortest_path_trees(topology, arc_cost, active)
    loads = route_demands(topology, active, demands, arc_cost, trees) if demands is not None else None
    return PruneResult(
        topology, off, frozenset(active), trees, loads, roles, adopted, tuple(candidates), baseline_loads
    )
