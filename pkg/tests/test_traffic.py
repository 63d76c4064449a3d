import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energyfwd.routing import shortest_path_tree
from energyfwd.topology import generate_random_topology
from energyfwd.traffic import (
    Demand,
    DemandSet,
    check_utilization,
    generate_demands,
    net_flow,
    route_demands,
)


def test_lambda_zero_is_empty(fig1):
    assert len(generate_demands(fig1, 0.0, seed=1)) == 0


def test_negative_lambda_rejected(fig1):
    with pytest.raises(ValueError):
        generate_demands(fig1, -0.1, seed=1)


def test_demand_count_is_poisson():
    topo = generate_random_topology(50, 348, seed=7)
    ds = generate_demands(topo, 0.2, seed=11)
    mean = 0.2 * 50 * 49
    assert abs(len(ds) - mean) <= 4 * math.sqrt(mean)


def test_volumes_within_bounds():
    topo = generate_random_topology(30, 120, seed=2)
    ds = generate_demands(topo, 0.7, seed=3)
    c = topo.max_capacity
    assert all(0.001 * c <= d.volume <= 0.1 * c for d in ds)
    assert all(d.source != d.target for d in ds)


def test_demands_are_deterministic_per_seed():
    topo = generate_random_topology(20, 60, seed=2)
    assert generate_demands(topo, 0.5, 9) == generate_demands(topo, 0.5, 9)
    assert generate_demands(topo, 0.5, 9) != generate_demands(topo, 0.5, 10)


def test_demand_validation():
    with pytest.raises(ValueError):
        Demand(1, 1, 0.1)
    with pytest.raises(ValueError):
        Demand(0, 1, 0.0)


def test_csv_round_trip():
    topo = generate_random_topology(10, 30, seed=2)
    ds = generate_demands(topo, 0.3, 4)
    again = DemandSet.from_csv(ds.to_csv(), ds.lam, ds.seed)
    assert again == ds
    assert ds.to_csv().splitlines()[0] == "source,target,volume"


def test_empty_demands_zero_load(fig1):
    loads = route_demands(fig1, None, DemandSet(()))
    assert set(loads.load) == fig1.arc_keys
    assert set(loads.load.values()) == {0.0}


def test_pair_single_demand(pair):
    loads = route_demands(pair, None, DemandSet((Demand(0, 1, 0.05),)))
    assert loads.load == {(0, 1): 0.05, (1, 0): 0.0}


def test_triangle_routes_over_two_hops(triangle):
    loads = route_demands(triangle, None, DemandSet((Demand(0, 2, 0.07),)))
    assert loads.load[(0, 1)] == loads.load[(1, 2)] == 0.07
    assert loads.load[(0, 2)] == 0.0


def test_unroutable_inside_active_set(triangle):
    from energyfwd.routing import RoutingError

    with pytest.raises(RoutingError):
        route_demands(triangle, {(0, 1), (1, 0)}, DemandSet((Demand(0, 2, 0.1),)))


def test_utilization_violation_excess(pair):
    loads = route_demands(pair, None, DemandSet((Demand(0, 1, 0.9),)))
    (v,) = check_utilization(loads, pair, mu=0.8)
    assert v.arc == (0, 1)
    assert v.excess == pytest.approx(0.1)


def test_utilization_boundary_is_allowed(pair):
    loads = route_demands(pair, None, DemandSet((Demand(0, 1, 0.5),)))
    assert check_utilization(loads, pair, mu=0.5) == []


def test_utilization_empty_when_idle(fig1):
    assert check_utilization(route_demands(fig1, None, DemandSet(())), fig1) == []


def test_mu_domain(pair):
    loads = route_demands(pair, None, DemandSet(()))
    for mu in (0.0, 1.5):
        with pytest.raises(ValueError):
            check_utilization(loads, pair, mu)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10**6), st.floats(0.05, 1.0))
def test_conservation_and_accounting(nodes, seed, lam):
    topo = generate_random_topology(nodes, 2 * (nodes - 1) + 2 * (nodes - 2), seed=seed)
    ds = generate_demands(topo, lam, seed)
    loads = route_demands(topo, None, ds)
    per_arc = dict.fromkeys(topo.arc_keys, 0.0)
    hop_volume = 0.0
    for d in ds:
        path = loads.path(d)
        flow = net_flow(path, d.volume, nodes)
        assert flow[d.source] == d.volume and flow[d.target] == -d.volume
        assert all(f == 0 for i, f in enumerate(flow) if i not in (d.source, d.target))
        for a in path:
            per_arc[a.key] += d.volume
        hop_volume += d.volume * len(path)
    assert per_arc == loads.load  # same accumulation order, so bit-identical
    assert sum(loads.load.values()) == pytest.approx(hop_volume, rel=1e-12)


def test_full_active_set_reproduces_unrestricted_paths():
    topo = generate_random_topology(25, 100, seed=5)
    ds = generate_demands(topo, 0.3, 5)
    full = route_demands(topo, topo.arc_keys, ds)
    free = route_demands(topo, None, ds)
    assert full.load == free.load
    for d in list(ds)[:50]:
        assert full.path(d) == shortest_path_tree(topo, d.source).path_to(d.target)


def test_routing_is_deterministic():
    topo = generate_random_topology(25, 100, seed=5)
    ds = generate_demands(topo, 0.3, 5)
    assert route_demands(topo, None, ds).load == route_demands(topo, None, ds).load
