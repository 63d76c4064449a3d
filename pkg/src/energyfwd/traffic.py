"""Poisson traffic demands, single-path routing and per-arc load accounting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Collection, Mapping

import numpy as np

from .routing import CostMetric, RoutingError, SptTree, all_shortest_path_trees
from .topology import Arc, ArcKey, Topology

# Fraction-of-capacity bounds on a single demand's volume.
MIN_VOLUME_FRACTION = 0.001
MAX_VOLUME_FRACTION = 0.1

_DEMAND_STREAM = 0xD3  # keeps the demand RNG stream apart from topology generation


@dataclass(frozen=True, slots=True)
class Demand:
    source: int
    target: int
    volume: float

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"demand source equals target ({self.source})")
        if not self.volume > 0:
            raise ValueError(f"demand volume must be positive, got {self.volume}")


@dataclass(frozen=True)
class DemandSet:
    demands: tuple[Demand, ...]
    lam: float = 0.0
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.demands)

    def __iter__(self):
        return iter(self.demands)

    @property
    def total_volume(self) -> float:
        return sum(d.volume for d in self.demands)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source", "target", "volume"])
        for d in self.demands:
            writer.writerow([d.source, d.target, repr(d.volume)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, lam: float = 0.0, seed: int | None = None) -> "DemandSet":
        reader = csv.DictReader(io.StringIO(text))
        demands = tuple(
            Demand(int(row["source"]), int(row["target"]), float(row["volume"])) for row in reader
        )
        return cls(demands, lam, seed)


def generate_demands(
    topology: Topology, lam: float, seed: int, capacity: float | None = None
) -> DemandSet:
    """Draw ``Poisson(lam)`` demands for every ordered bridge pair.

    Each demand's volume is uniform in ``[0.001 c, 0.1 c]``; ``c`` defaults
    to the largest arc capacity of the topology.
    """
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    c = topology.max_capacity if capacity is None else capacity
    n = topology.node_count
    rng = np.random.default_rng([seed, _DEMAND_STREAM])
    pairs = [(s, t) for s in range(n) for t in range(n) if s != t]
    counts = rng.poisson(lam, size=len(pairs)).tolist()
    volumes = rng.uniform(MIN_VOLUME_FRACTION * c, MAX_VOLUME_FRACTION * c, size=sum(counts)).tolist()
    demands = []
    k = 0
    for (s, t), cnt in zip(pairs, counts):
        for _ in range(cnt):
            demands.append(Demand(s, t, volumes[k]))
            k += 1
    return DemandSet(tuple(demands), lam, seed)


@dataclass
class LoadMap:
    """Per-arc routed load ``f_ij`` plus the trees that fixed each demand's path."""

    load: dict[ArcKey, float]
    trees: Mapping[int, SptTree]
    demands: DemandSet

    def path(self, demand: Demand) -> list[Arc]:
        return self.trees[demand.source].path_to(demand.target)

    def utilization(self, topology: Topology) -> dict[ArcKey, float]:
        return {k: f / topology.arc(*k).capacity for k, f in self.load.items()}

    def max_utilization(self, topology: Topology) -> float:
        return max(self.utilization(topology).values(), default=0.0)


def route_demands(
    topology: Topology,
    active: Collection[ArcKey] | None,
    demands: DemandSet,
    arc_cost: CostMetric = "energy",
    trees: Mapping[int, SptTree] | None = None,
) -> LoadMap:
    """Route every demand unsplit along its shortest path inside ``active``.

    ``trees`` may supply precomputed shortest-path trees over the same
    active set; otherwise they are computed here. Every arc of the topology
    appears in the resulting load map, unused ones with load 0.
    """
    if trees is None:
        sources = sorted({d.source for d in demands})
        try:
            trees = all_shortest_path_trees(topology, arc_cost, active, roots=sources)
        except RoutingError as exc:
            raise RoutingError(f"cannot route demands inside the active arc set: {exc}") from None
    load = {a.key: 0.0 for a in topology.arcs}
    # Walking each path arc by arc keeps the accumulation order fixed.
    for d in demands:
        tree = trees[d.source]
        node = d.target
        if node not in tree.distance:
            raise RoutingError(f"demand {d.source}->{d.target} is unroutable")
        while node != d.source:
            arc = tree.parent[node]
            load[arc.key] += d.volume
            node = arc.src
    return LoadMap(load, trees, demands)


@dataclass(frozen=True)
class Violation:
    arc: ArcKey
    load: float
    limit: float

    @property
    def excess(self) -> float:
        return self.load - self.limit


def check_utilization(loads: LoadMap, topology: Topology, mu: float = 1.0) -> list[Violation]:
    """Arcs whose load exceeds ``mu`` times their capacity, in arc order."""
    if not 0 < mu <= 1:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    out = []
    for key in sorted(loads.load):
        f = loads.load[key]
        limit = mu * topology.arc(*key).capacity
        if f > limit:
            out.append(Violation(key, f, limit))
    return out


def net_flow(path: list[Arc], volume: float, node_count: int) -> list[float]:
    """Outgoing minus incoming flow at each bridge for one demand's path."""
    out = [0.0] * node_count
    inc = [0.0] * node_count
    for arc in path:
        out[arc.src] += volume
        inc[arc.dst] += volume
    return [o - i for o, i in zip(out, inc)]
