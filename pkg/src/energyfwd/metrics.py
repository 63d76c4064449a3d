"""Energy saving, average active-link load and Jain fairness."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Collection

from .routing import l_min
from .topology import ArcKey, Topology
from .traffic import LoadMap, check_utilization


class MetricError(ValueError):
    pass


def sigma(total_arcs: int, active_arcs: int, node_count: int) -> float:
    """Share of prunable arcs actually switched off, in percent.

    Prunable means anything above the ``2(n-1)`` connectivity floor.
    """
    floor = l_min(node_count)
    if total_arcs <= floor:
        raise MetricError(
            f"energy saving undefined: {total_arcs} arcs leave nothing above the floor of {floor}"
        )
    if not floor <= active_arcs <= total_arcs:
        raise MetricError(f"active arc count {active_arcs} outside [{floor}, {total_arcs}]")
    return 100.0 * (total_arcs - active_arcs) / (total_arcs - floor)


def rho(loads: LoadMap, active: Collection[ArcKey], topology: Topology) -> float:
    """Mean utilization of the active arcs, in percent."""
    if not active:
        raise MetricError("average load undefined on an empty active set")
    keys = sorted(active)
    return 100.0 * sum(loads.load[k] / topology.arc(*k).capacity for k in keys) / len(keys)


def jain_index(values: Collection[float]) -> float | None:
    """Jain's fairness index; ``None`` when every value is zero."""
    if not values:
        raise MetricError("fairness undefined on an empty set")
    # Floats are exact binary rationals, so the index is evaluated exactly
    # and rounded once: equal loads give 1.0, one loaded arc gives 1/n.
    x = [Fraction(v) for v in values]
    sq = sum(v * v for v in x)
    if sq == 0:
        return None
    return float(sum(x) ** 2 / (len(x) * sq))


def fairness(loads: LoadMap, active: Collection[ArcKey], topology: Topology | None = None) -> float | None:
    """Jain index over the active arcs' loads.

    Given a topology the index is taken over utilizations ``f/c`` rather
    than raw loads; the two agree when capacities are uniform. Returns
    ``None`` (no traffic) when all active loads are zero.
    """
    keys = sorted(active)
    if topology is None:
        vals = [loads.load[k] for k in keys]
    else:
        vals = [loads.load[k] / topology.arc(*k).capacity for k in keys]
    return jain_index(vals)


def energy_on(topology: Topology, active: Collection[ArcKey]) -> float:
    return sum(topology.arc(*k).energy for k in sorted(active))


@dataclass(frozen=True)
class MetricsReport:
    sigma_percent: float | None  # None when no arc can be pruned at all
    rho_percent: float
    fairness: float | None
    energy_on: float
    active_count: int
    off_count: int
    max_utilization: float
    violations: int


def evaluate(
    topology: Topology, active: Collection[ArcKey], loads: LoadMap, mu: float = 1.0
) -> MetricsReport:
    total = len(topology.arcs)
    try:
        s = sigma(total, len(active), topology.node_count)
    except MetricError:
        if total > l_min(topology):
            raise
        s = None
    util = [loads.load[k] / topology.arc(*k).capacity for k in sorted(active)]
    return MetricsReport(
        sigma_percent=s,
        rho_percent=rho(loads, active, topology),
        fairness=fairness(loads, active, topology),
        energy_on=energy_on(topology, active),
        active_count=len(active),
        off_count=total - len(active),
        max_utilization=max(util, default=0.0),
        violations=len(check_utilization(loads, topology, mu)),
    )
