"""Shortest-path trees, their superposition and connectivity checks."""

from __future__ import annotations

import heapq
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Collection, Iterable, Literal

from .topology import Arc, ArcKey, Topology

CostMetric = Literal["energy", "hop"]
COST_METRICS: tuple[str, ...] = ("energy", "hop")


class RoutingError(RuntimeError):
    pass


def arc_cost(arc: Arc, metric: CostMetric = "energy") -> float:
    if metric == "energy":
        return arc.energy
    if metric == "hop":
        return 1.0
    raise ValueError(f"unknown cost metric {metric!r}")


@dataclass
class SptTree:
    """Shortest-path tree rooted at ``root``.

    ``parent[v]`` is the tree arc entering ``v``; the root has no entry.
    """

    root: int
    parent: dict[int, Arc]
    distance: dict[int, float]
    metric: CostMetric = "energy"
    _children: dict[int, list[int]] | None = field(default=None, repr=False, compare=False)

    @property
    def node_count(self) -> int:
        return len(self.distance)

    def arc_keys(self) -> set[ArcKey]:
        return {a.key for a in self.parent.values()}

    def children(self, node: int) -> list[int]:
        if self._children is None:
            kids: dict[int, list[int]] = {v: [] for v in self.distance}
            for v in sorted(self.parent):
                kids[self.parent[v].src].append(v)
            self._children = kids
        return self._children[node]

    def path_to(self, target: int) -> list[Arc]:
        """Tree arcs from the root to ``target``, in travel order."""
        if target not in self.distance:
            raise KeyError(f"bridge {target} is not in the tree")
        path = []
        node = target
        while node != self.root:
            arc = self.parent[node]
            path.append(arc)
            node = arc.src
        path.reverse()
        return path


def _adjacency(
    topology: Topology, metric: CostMetric, active: Collection[ArcKey] | None
) -> list[list[tuple[int, float, Arc]]]:
    if active is not None and not isinstance(active, (set, frozenset, dict)):
        active = set(active)
    adj: list[list[tuple[int, float, Arc]]] = [[] for _ in range(topology.node_count)]
    for arc in topology.arcs:
        if active is None or arc.key in active:
            adj[arc.src].append((arc.dst, arc_cost(arc, metric), arc))
    return adj


def _dijkstra(adj, n: int, root: int, metric: CostMetric) -> SptTree:
    # Labels compare as (distance, hops, predecessor id): ties go to the
    # path with fewer hops, then to the smaller predecessor.
    best: list[tuple[float, int, int] | None] = [None] * n
    via: list[Arc | None] = [None] * n
    best[root] = (0.0, 0, -1)
    done = [False] * n
    heap = [(0.0, 0, root)]
    while heap:
        d, h, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, c, arc in adj[u]:
            if done[v]:
                continue
            cand = (d + c, h + 1, u)
            cur = best[v]
            if cur is None or cand < cur:
                best[v] = cand
                via[v] = arc
                heapq.heappush(heap, (cand[0], cand[1], v))
    missing = [v for v in range(n) if not done[v]]
    if missing:
        raise RoutingError(f"bridge {missing[0]} is unreachable from root {root}")
    parent = {v: via[v] for v in range(n) if v != root}
    distance = {v: best[v][0] for v in range(n)}
    return SptTree(root, parent, distance, metric)


def shortest_path_tree(
    topology: Topology,
    root: int,
    arc_cost: CostMetric = "energy",
    active: Collection[ArcKey] | None = None,
) -> SptTree:
    """Dijkstra tree from ``root``, optionally restricted to ``active`` arcs."""
    if not 0 <= root < topology.node_count:
        raise KeyError(f"unknown bridge {root!r}")
    adj = _adjacency(topology, arc_cost, active)
    return _dijkstra(adj, topology.node_count, root, arc_cost)


def all_shortest_path_trees(
    topology: Topology,
    arc_cost: CostMetric = "energy",
    active: Collection[ArcKey] | None = None,
    roots: Iterable[int] | None = None,
) -> dict[int, SptTree]:
    adj = _adjacency(topology, arc_cost, active)
    n = topology.node_count
    roots = range(n) if roots is None else roots
    return {r: _dijkstra(adj, n, r, arc_cost) for r in roots}


@dataclass(frozen=True)
class Spg:
    """Union of shortest-path trees: the active arc set and per-arc tree counts."""

    active_arcs: frozenset[ArcKey]
    contributing_trees: dict[ArcKey, int]


def superpose(trees: Iterable[SptTree]) -> Spg:
    counts: Counter[ArcKey] = Counter()
    for tree in trees:
        counts.update(a.key for a in tree.parent.values())
    return Spg(frozenset(counts), dict(counts))


def l_min(topology: Topology | int) -> int:
    """Fewest unidirectional arcs that keep ``n`` bridges connected: ``2(n-1)``."""
    n = topology.node_count if isinstance(topology, Topology) else int(topology)
    return 2 * (n - 1)


def _reaches_all(n: int, adj: list[list[int]]) -> bool:
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == n


def is_strongly_connected(topology: Topology, active: Iterable[ArcKey]) -> bool:
    """True iff the ``active`` arcs give a directed path between every ordered pair."""
    n = topology.node_count
    fwd: list[list[int]] = [[] for _ in range(n)]
    bwd: list[list[int]] = [[] for _ in range(n)]
    for u, v in active:
        fwd[u].append(v)
        bwd[v].append(u)
    return _reaches_all(n, fwd) and _reaches_all(n, bwd)
