"""Bridge graph model, adjacency-matrix I/O and random topology generation.

A topology is a set of bridges ``0 .. n-1`` joined by directed arcs. Every
physical link is stored as two arcs, one per direction, and each arc carries
its own energy weight and capacity.
"""

from __future__ import annotations

import hashlib
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import networkx as nx
import numpy as np

DEFAULT_CAPACITY = 1.0
DEFAULT_ENERGY_RANGE = (0.1, 0.5)

ArcKey = tuple[int, int]


class TopologyError(ValueError):
    """Invalid topology data. ``row``/``col`` locate the offending matrix entry."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


@dataclass(frozen=True, slots=True)
class Arc:
    src: int
    dst: int
    energy: float
    capacity: float = DEFAULT_CAPACITY

    @property
    def key(self) -> ArcKey:
        return (self.src, self.dst)

    @property
    def reverse_key(self) -> ArcKey:
        return (self.dst, self.src)


class Topology:
    """Immutable, validated bridge graph.

    Arcs are kept sorted by ``(src, dst)`` so that every iteration over the
    topology is deterministic.
    """

    __slots__ = ("node_count", "arcs", "_by_key", "_out", "_keys")

    def __init__(self, node_count: int, arcs: Iterable[Arc]):
        arcs = tuple(sorted(arcs, key=lambda a: (a.src, a.dst)))
        if node_count < 2:
            raise TopologyError(f"a topology needs at least 2 bridges, got {node_count}")
        by_key: dict[ArcKey, Arc] = {}
        for arc in arcs:
            if not (0 <= arc.src < node_count and 0 <= arc.dst < node_count):
                raise TopologyError(f"arc {arc.key} references an unknown bridge", arc.src, arc.dst)
            if arc.src == arc.dst:
                raise TopologyError(f"self-loop at bridge {arc.src}", arc.src, arc.dst)
            if not arc.energy > 0:
                raise TopologyError(f"arc {arc.key} has non-positive energy {arc.energy}", arc.src, arc.dst)
            if not arc.capacity > 0:
                raise TopologyError(
                    f"arc {arc.key} has non-positive capacity {arc.capacity}", arc.src, arc.dst
                )
            if arc.key in by_key:
                raise TopologyError(f"parallel arc {arc.key}", arc.src, arc.dst)
            by_key[arc.key] = arc
        for (u, v) in by_key:
            if (v, u) not in by_key:
                raise TopologyError(
                    f"arc {u}->{v} has no reverse arc: missing entry at row {v}, column {u}", v, u
                )
        out: list[list[Arc]] = [[] for _ in range(node_count)]
        for arc in arcs:
            out[arc.src].append(arc)

        self.node_count = node_count
        self.arcs = arcs
        self._by_key = by_key
        self._out = tuple(tuple(a) for a in out)
        self._keys = frozenset(by_key)

        unreachable = _first_unreachable(node_count, self._out)
        if unreachable is not None:
            raise TopologyError(f"topology is disconnected: bridge {unreachable} is unreachable from 0")

    def __repr__(self) -> str:
        return f"Topology(nodes={self.node_count}, arcs={len(self.arcs)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return self.node_count == other.node_count and self.arcs == other.arcs

    def __hash__(self) -> int:
        return hash((self.node_count, self.arcs))

    @property
    def arc_keys(self) -> frozenset[ArcKey]:
        return self._keys

    def arc(self, src: int, dst: int) -> Arc:
        try:
            return self._by_key[(src, dst)]
        except KeyError:
            raise KeyError(f"no arc {src}->{dst}") from None

    def has_arc(self, src: int, dst: int) -> bool:
        return (src, dst) in self._by_key

    def out_arcs(self, node: int) -> tuple[Arc, ...]:
        self._check_node(node)
        return self._out[node]

    def neighbors(self, node: int) -> list[int]:
        return [a.dst for a in self.out_arcs(node)]

    def degree(self, node: int) -> int:
        return len(self.out_arcs(node))

    @property
    def max_capacity(self) -> float:
        return max(a.capacity for a in self.arcs)

    def _check_node(self, node: int) -> None:
        if not (isinstance(node, (int, np.integer)) and 0 <= node < self.node_count):
            raise KeyError(f"unknown bridge {node!r}")

    def to_matrix_text(self) -> str:
        """Serialize as a whitespace-separated adjacency matrix of energies."""
        n = self.node_count
        rows = [["0"] * n for _ in range(n)]
        for arc in self.arcs:
            rows[arc.src][arc.dst] = repr(float(arc.energy))
        return "".join(" ".join(r) + "\n" for r in rows)

    def digest(self) -> str:
        """Short content hash of the matrix text and capacities."""
        h = hashlib.sha256(self.to_matrix_text().encode())
        h.update(repr(tuple(a.capacity for a in self.arcs)).encode())
        return h.hexdigest()[:16]


def _first_unreachable(n: int, out: tuple[tuple[Arc, ...], ...]) -> int | None:
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for a in out[u]:
            if not seen[a.dst]:
                seen[a.dst] = True
                queue.append(a.dst)
    for i, ok in enumerate(seen):
        if not ok:
            return i
    return None


_SPLIT = re.compile(r"[,\s]+")


def _parse_rows(text: str) -> list[list[float]]:
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise TopologyError(f"line {lineno}: {exc}", len(rows)) from None
    if not rows:
        raise TopologyError("empty adjacency matrix")
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise TopologyError(f"matrix is not square: row {i} has {len(row)} entries, expected {n}", i)
    return rows


def _entry_violations(rows: list[list[float]]) -> list[TopologyError]:
    n = len(rows)
    found = []
    for i in range(n):
        for j in range(n):
            w = rows[i][j]
            if not np.isfinite(w) or w < 0:
                found.append(TopologyError(f"invalid entry {w} at row {i}, column {j}", i, j))
        if rows[i][i] != 0:
            found.append(TopologyError(f"nonzero diagonal entry at row {i}, column {i}", i, i))
    for i in range(n):
        for j in range(n):
            if rows[i][j] > 0 and not rows[j][i] > 0:
                found.append(
                    TopologyError(
                        f"asymmetric adjacency: row {j}, column {i} is 0 but row {i}, column {j} is not",
                        j,
                        i,
                    )
                )
    return found


def matrix_violations(text: str) -> list[TopologyError]:
    """Every problem preventing ``text`` from loading, in row-major order."""
    try:
        rows = _parse_rows(text)
    except TopologyError as exc:
        return [exc]
    found = _entry_violations(rows)
    if not found:
        try:
            _build(rows, DEFAULT_CAPACITY)
        except TopologyError as exc:
            found.append(exc)
    return found


def _build(rows: list[list[float]], capacity: float) -> Topology:
    n = len(rows)
    arcs = [Arc(i, j, rows[i][j], capacity) for i in range(n) for j in range(n) if rows[i][j] > 0]
    return Topology(n, arcs)


def load_adjacency_matrix(text: str, capacity: float = DEFAULT_CAPACITY) -> Topology:
    """Parse a weighted adjacency matrix.

    One row per line, entries separated by commas and/or whitespace, ``#``
    starts a comment. Entry ``(i, j) > 0`` creates arc ``i -> j`` whose energy
    is the entry. Every arc receives ``capacity``.
    """
    rows = _parse_rows(text)
    found = _entry_violations(rows)
    if found:
        raise found[0]
    return _build(rows, capacity)


def generate_random_topology(
    nodes: int,
    directed_links: int,
    energy_range: tuple[float, float] = DEFAULT_ENERGY_RANGE,
    seed: int = 0,
    capacity: float = DEFAULT_CAPACITY,
) -> Topology:
    """Random connected topology with exactly ``directed_links`` arcs.

    A uniformly random labelled spanning tree (random Pruefer code) provides
    connectivity; random absent links are then added in both directions
    until the arc count is reached. Arc energies are uniform over
    ``energy_range``.
    """
    if nodes < 2:
        raise TopologyError(f"need at least 2 nodes, got {nodes}")
    if directed_links % 2:
        raise TopologyError(f"directed_links must be even, got {directed_links}")
    lo_links, hi_links = 2 * (nodes - 1), nodes * (nodes - 1)
    if not lo_links <= directed_links <= hi_links:
        raise TopologyError(
            f"infeasible size: {nodes} nodes admit between {lo_links} and {hi_links} arcs, "
            f"got {directed_links}"
        )
    lo, hi = energy_range
    if not 0 < lo <= hi:
        raise TopologyError(f"energy range must satisfy 0 < low <= high, got {energy_range}")

    rng = np.random.default_rng(seed)
    prufer = rng.integers(0, nodes, size=nodes - 2).tolist()
    tree = nx.from_prufer_sequence(prufer) if nodes > 2 else nx.path_graph(2)
    links = {(min(u, v), max(u, v)) for u, v in tree.edges()}
    extra = directed_links // 2 - len(links)
    if extra:
        absent = [(i, j) for i in range(nodes) for j in range(i + 1, nodes) if (i, j) not in links]
        picks = rng.choice(len(absent), size=extra, replace=False)
        links.update(absent[k] for k in picks.tolist())
    keys = sorted([(u, v) for u, v in links] + [(v, u) for u, v in links])
    energies = rng.uniform(lo, hi, size=len(keys)).tolist()
    return Topology(nodes, [Arc(u, v, e, capacity) for (u, v), e in zip(keys, energies)])


def incident_energy(topology: Topology, node: int) -> float:
    """Total energy of the arcs leaving ``node``."""
    return sum(a.energy for a in topology.out_arcs(node))
