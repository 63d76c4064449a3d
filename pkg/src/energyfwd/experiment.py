"""Seeded threshold sweeps comparing EAR and MEEAFS, with CSV output.

Run ``r`` of a scenario uses seed ``base_seed + r`` both for the generated
topology (when the topology is not read from a file) and for the demands,
so every row can be regenerated in isolation.
"""

from __future__ import annotations

import csv
import hashlib
import io
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .ear import run_ear
from .meeafs import MeeafsConfig, MeeafsPlan
from .metrics import MetricsReport, evaluate
from .routing import COST_METRICS, all_shortest_path_trees
from .topology import DEFAULT_CAPACITY, DEFAULT_ENERGY_RANGE, Topology, generate_random_topology, load_adjacency_matrix
from .traffic import generate_demands, route_demands

ALGORITHMS = ("ear", "meeafs")
DEFAULT_THRESHOLDS = tuple(round(0.05 * i, 2) for i in range(21))


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ScenarioError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    nodes: int
    links: int
    energy_range: tuple[float, float] = DEFAULT_ENERGY_RANGE

    def describe(self) -> str:
        lo, hi = self.energy_range
        return f"random:{self.nodes}:{self.links}:{lo!r}:{hi!r}"


@dataclass(frozen=True)
class Scenario:
    topology: Path | GeneratorSpec
    seed: int
    algorithm: str = "meeafs"
    lam: float = 0.2
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    runs: int = 1
    mu: float = 1.0
    cost: str = "energy"
    capacity: float = DEFAULT_CAPACITY
    name: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.cost not in COST_METRICS:
            raise ConfigError(f"cost must be one of {COST_METRICS}, got {self.cost!r}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if not 0 < self.mu <= 1:
            raise ConfigError(f"mu must lie in (0, 1], got {self.mu}")
        if not self.thresholds:
            raise ConfigError("at least one threshold is required")
        if any(not 0 <= t <= 1 for t in self.thresholds):
            raise ConfigError(f"thresholds must lie in [0, 1]: {self.thresholds}")
        if list(self.thresholds) != sorted(self.thresholds):
            raise ConfigError("thresholds must be sorted ascending")

    @property
    def scenario_id(self) -> str:
        if self.name:
            return self.name
        topo = self.topology.describe() if isinstance(self.topology, GeneratorSpec) else str(self.topology)
        key = repr((topo, self.lam, self.thresholds, self.runs, self.seed, self.mu, self.cost, self.capacity))
        return hashlib.sha256(key.encode()).hexdigest()[:10]

    def build_topology(self, seed: int) -> Topology:
        if isinstance(self.topology, GeneratorSpec):
            g = self.topology
            return generate_random_topology(g.nodes, g.links, g.energy_range, seed, self.capacity)
        return _load_file(str(self.topology), self.capacity)


@lru_cache(maxsize=8)
def _load_file(path: str, capacity: float) -> Topology:
    return load_adjacency_matrix(Path(path).read_text(), capacity)


@dataclass
class ResultRow:
    scenario: str
    algorithm: str
    lam: float
    threshold: float
    run: int | str  # run index, or "mean" on aggregate rows
    seed: int | None
    topology_hash: str
    sigma: float | None
    rho: float
    fairness: float | None
    energy_on: float
    active_count: float
    off_count: float
    max_utilization: float
    violations: float
    wall_time_ms: float = 0.0
    sigma_std: float | None = None
    rho_std: float | None = None
    fairness_std: float | None = None

    @property
    def is_aggregate(self) -> bool:
        return not isinstance(self.run, int)


CSV_COLUMNS = (
    "scenario",
    "algorithm",
    "lambda",
    "threshold",
    "run",
    "seed",
    "topology_hash",
    "sigma",
    "sigma_std",
    "rho",
    "rho_std",
    "fairness",
    "fairness_std",
    "energy_on",
    "active_count",
    "off_count",
    "max_utilization",
    "violations",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def rows_to_csv(rows: Iterable[ResultRow], include_timing: bool = False) -> str:
    """Render rows as CSV. Empty cells mean "undefined" (no traffic, nothing prunable).

    Timing is opt-in because it is the only non-reproducible column.
    """
    cols = CSV_COLUMNS + (("wall_time_ms",) if include_timing else ())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        d = asdict(r)
        d["lambda"] = d.pop("lam")
        w.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()


def _row(sc: Scenario, alg: str, th: float, run: int, seed: int, topo: Topology, m: MetricsReport, ms: float):
    return ResultRow(
        scenario=sc.scenario_id,
        algorithm=alg,
        lam=sc.lam,
        threshold=th,
        run=run,
        seed=seed,
        topology_hash=topo.digest(),
        sigma=m.sigma_percent,
        rho=m.rho_percent,
        fairness=m.fairness,
        energy_on=m.energy_on,
        active_count=m.active_count,
        off_count=m.off_count,
        max_utilization=m.max_utilization,
        violations=m.violations,
        wall_time_ms=ms,
    )


def execute_run(scenario: Scenario, run: int, algorithms: Sequence[str]) -> list[ResultRow]:
    """All rows of one run: one per (algorithm, threshold)."""
    seed = scenario.seed + run
    try:
        topo = scenario.build_topology(seed)
        demands = generate_demands(topo, scenario.lam, seed)
        t0 = time.perf_counter()
        trees = all_shortest_path_trees(topo, scenario.cost)
        tree_ms = 1e3 * (time.perf_counter() - t0)
        rows: list[ResultRow] = []
        for alg in algorithms:
            if alg == "ear":
                t0 = time.perf_counter()
                res = run_ear(topo, scenario.cost, trees)
                loads = route_demands(topo, res.active_arcs, demands, scenario.cost, res.residual_routing)
                report = evaluate(topo, res.active_arcs, loads, scenario.mu)
                ms = tree_ms + 1e3 * (time.perf_counter() - t0)
                rows.extend(_row(scenario, alg, th, run, seed, topo, report, ms) for th in scenario.thresholds)
                continue
            t0 = time.perf_counter()
            plan = MeeafsPlan.prepare(topo, demands, scenario.cost, trees)
            prep_ms = tree_ms + 1e3 * (time.perf_counter() - t0)
            reports: dict[int, MetricsReport] = {}
            for th in scenario.thresholds:
                t1 = time.perf_counter()
                res = plan.run(MeeafsConfig(th, scenario.mu))
                report = reports.get(id(res))
                if report is None:
                    report = reports[id(res)] = evaluate(topo, res.active_arcs, res.final_loads, scenario.mu)
                ms = prep_ms + 1e3 * (time.perf_counter() - t1)
                rows.append(_row(scenario, alg, th, run, seed, topo, report, ms))
        return rows
    except Exception as exc:
        raise ScenarioError(f"scenario {scenario.scenario_id}, run {run} (seed {seed}): {exc}") from exc


def _mean(values: list) -> float | None:
    vals = [v for v in values if v is not None]
    return statistics.fmean(vals) if vals else None


def _std(values: list) -> float | None:
    vals = [v for v in values if v is not None]
    return statistics.stdev(vals) if len(vals) >= 2 else None


def aggregate(rows: Sequence[ResultRow]) -> ResultRow:
    """Mean row over the runs of one (algorithm, threshold) cell, with sample stds."""
    first = rows[0]
    hashes = {r.topology_hash for r in rows}
    return ResultRow(
        scenario=first.scenario,
        algorithm=first.algorithm,
        lam=first.lam,
        threshold=first.threshold,
        run="mean",
        seed=None,
        topology_hash=first.topology_hash if len(hashes) == 1 else "",
        sigma=_mean([r.sigma for r in rows]),
        rho=statistics.fmean(r.rho for r in rows),
        fairness=_mean([r.fairness for r in rows]),
        energy_on=statistics.fmean(r.energy_on for r in rows),
        active_count=statistics.fmean(r.active_count for r in rows),
        off_count=statistics.fmean(r.off_count for r in rows),
        max_utilization=statistics.fmean(r.max_utilization for r in rows),
        violations=statistics.fmean(r.violations for r in rows),
        wall_time_ms=statistics.fmean(r.wall_time_ms for r in rows),
        sigma_std=_std([r.sigma for r in rows]),
        rho_std=_std([r.rho for r in rows]),
        fairness_std=_std([r.fairness for r in rows]),
    )


def _execute(scenario: Scenario, algorithms: Sequence[str], workers: int) -> list[ResultRow]:
    runs = range(scenario.runs)
    if workers > 1 and scenario.runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_run = list(pool.map(execute_run, [scenario] * len(runs), runs, [algorithms] * len(runs)))
    else:
        per_run = [execute_run(scenario, r, algorithms) for r in runs]
    cells: dict[tuple[str, float], list[ResultRow]] = {}
    for rows in per_run:
        for row in rows:
            cells.setdefault((row.algorithm, row.threshold), []).append(row)
    out: list[ResultRow] = []
    for alg in algorithms:
        for th in scenario.thresholds:
            cell = sorted(cells[(alg, th)], key=lambda r: r.run)
            out.extend(cell)
            out.append(aggregate(cell))
    return out


def run_scenario(scenario: Scenario, workers: int = 1) -> list[ResultRow]:
    """Per-run rows followed by a ``run="mean"`` row for each threshold."""
    return _execute(scenario, (scenario.algorithm,), workers)


def run_comparison(scenario: Scenario, workers: int = 1) -> list[ResultRow]:
    """Both algorithms on the same topologies and demands (EAR rows first)."""
    return _execute(scenario, ALGORITHMS, workers)


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    lam: float
    threshold: float
    n: int
    sigma_mean: float | None
    rho_mean: float
    fairness_mean: float | None
    max_utilization_mean: float


def sweep_report(rows: Iterable[ResultRow]) -> list[SummaryRow]:
    """Per-(algorithm, lambda, threshold) means over the per-run rows."""
    groups: dict[tuple[str, float, float], list[ResultRow]] = {}
    for r in rows:
        if not r.is_aggregate:
            groups.setdefault((r.algorithm, r.lam, r.threshold), []).append(r)
    return [
        SummaryRow(
            alg,
            lam,
            th,
            len(g),
            _mean([r.sigma for r in g]),
            statistics.fmean(r.rho for r in g),
            _mean([r.fairness for r in g]),
            statistics.fmean(r.max_utilization for r in g),
        )
        for (alg, lam, th), g in sorted(groups.items())
    ]


def summary_to_csv(summary: Iterable[SummaryRow]) -> str:
    cols = [f.name for f in fields(SummaryRow)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda" if c == "lam" else c for c in cols])
    for s in summary:
        w.writerow([_fmt(getattr(s, c)) for c in cols])
    return buf.getvalue()


def parse_thresholds(text: str) -> tuple[float, ...]:
    """``"0.2,0.5,1"`` or a grid ``"start:stop:step"`` (stop inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"threshold grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("threshold grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def parse_topology_source(text: str, base_dir: Path | None = None) -> Path | GeneratorSpec:
    """A matrix file path, or ``random:NODES:LINKS[:LOW:HIGH]``."""
    if text.startswith("random:"):
        parts = text.split(":")[1:]
        if len(parts) not in (2, 4):
            raise ValueError(f"expected random:NODES:LINKS[:LOW:HIGH], got {text!r}")
        erange = (float(parts[2]), float(parts[3])) if len(parts) == 4 else DEFAULT_ENERGY_RANGE
        return GeneratorSpec(int(parts[0]), int(parts[1]), erange)
    path = Path(text)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return path


_KEYS = {
    "topology": "topology",
    "algorithm": "algorithm",
    "lambda": "lam",
    "thresholds": "thresholds",
    "runs": "runs",
    "seed": "seed",
    "mu": "mu",
    "cost": "cost",
    "capacity": "capacity",
    "name": "name",
}


def parse_config(text: str, base_dir: Path | None = None, **overrides) -> Scenario:
    """Build a scenario from ``key=value`` lines; keyword overrides win.

    Relative topology paths resolve against ``base_dir``.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[_KEYS[key]] = _convert(_KEYS[key], val, base_dir)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    for required in ("topology", "seed"):
        if required not in values:
            raise ConfigError(f"missing required setting {required!r}")
    return Scenario(**values)


def _convert(field_name: str, val: str, base_dir: Path | None):
    if field_name == "topology":
        return parse_topology_source(val, base_dir)
    if field_name == "thresholds":
        return parse_thresholds(val)
    if field_name in ("runs", "seed"):
        return int(val)
    if field_name in ("lam", "mu", "capacity"):
        return float(val)
    if field_name == "algorithm":
        return val.lower()
    return val


def with_algorithm(scenario: Scenario, algorithm: str) -> Scenario:
    return replace(scenario, algorithm=algorithm)
