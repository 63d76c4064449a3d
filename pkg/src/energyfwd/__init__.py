"""Energy-aware forwarding for shortest-path-bridged metro Ethernet cores.

Routes Poisson traffic over weighted bridge graphs and puts links to sleep
with either the degree-based EAR baseline or the energy-weighted,
load-thresholded MEEAFS heuristic.
"""

from .ear import elect_exporters_by_degree, run_ear
from .meeafs import MeeafsConfig, MeeafsPlan, bridge_weight, elect_exporters_by_energy, run_meeafs
from .metrics import evaluate, fairness, rho, sigma
from .pruning import Mspt, PruneResult, RoleAssignment, reroot_at_neighbor
from .routing import SptTree, is_strongly_connected, l_min, shortest_path_tree, superpose
from .topology import Arc, Topology, TopologyError, generate_random_topology, incident_energy, load_adjacency_matrix
from .traffic import Demand, DemandSet, LoadMap, check_utilization, generate_demands, route_demands

__version__ = "0.1.0"
