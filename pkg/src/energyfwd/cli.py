"""Command-line front-end: ``energyfwd {generate,validate,run,sweep,compare}``.

Exit codes: 0 success, 2 usage error, 3 bad input data, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiment import (
    DEFAULT_THRESHOLDS,
    ConfigError,
    ScenarioError,
    parse_config,
    parse_thresholds,
    parse_topology_source,
    rows_to_csv,
    run_comparison,
    run_scenario,
    summary_to_csv,
    sweep_report,
)
from .routing import is_strongly_connected, l_min
from .topology import TopologyError, generate_random_topology, load_adjacency_matrix, matrix_violations

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


class UsageError(Exception):
    pass


def _energy_range(text: str) -> tuple[float, float]:
    parts = text.replace(":", ",").split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}") from None


def _thresholds(text: str) -> tuple[float, ...]:
    try:
        return parse_thresholds(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_generate(args) -> int:
    topo = generate_random_topology(args.nodes, args.links, args.energy_range, args.seed)
    text = topo.to_matrix_text()
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    connected = is_strongly_connected(topo, topo.arc_keys)
    print(
        f"nodes={topo.node_count} arcs={len(topo.arcs)} connected={'yes' if connected else 'no'}",
        file=sys.stderr if args.output == "-" else sys.stdout,
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        text = Path(args.topology).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    problems = matrix_violations(text)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_DATA
    topo = load_adjacency_matrix(text)
    print(
        f"nodes={topo.node_count} arcs={len(topo.arcs)} l_min={l_min(topo)} "
        f"symmetric=yes connected={'yes' if is_strongly_connected(topo, topo.arc_keys) else 'no'}"
    )
    return EXIT_OK


def _scenario(args, default_thresholds):
    if args.topology and args.nodes is not None:
        raise UsageError("give either --topology or --nodes/--links, not both")
    topology = None
    if args.topology:
        topology = parse_topology_source(args.topology)
    elif args.nodes is not None:
        if args.links is None:
            raise UsageError("--nodes requires --links")
        spec = f"random:{args.nodes}:{args.links}"
        if args.energy_range:
            spec += ":{}:{}".format(*args.energy_range)
        topology = parse_topology_source(spec)
    overrides = dict(
        topology=topology,
        algorithm=args.algorithm,
        lam=args.lam,
        thresholds=args.thresholds,
        runs=args.runs,
        seed=args.seed,
        mu=args.mu,
        cost=args.cost,
        capacity=args.capacity,
        name=args.name,
    )
    if args.config:
        cfg = Path(args.config)
        text = cfg.read_text()
        try:
            return parse_config(text, cfg.parent, **overrides)
        except ConfigError as exc:
            raise ConfigError(f"{cfg}: {exc}") from None
    if overrides["seed"] is None:
        raise UsageError("--seed is required (runs are always explicitly seeded)")
    if overrides["topology"] is None:
        raise UsageError("--topology or --nodes/--links is required")
    if overrides["thresholds"] is None:
        overrides["thresholds"] = default_thresholds
    return parse_config("", None, **overrides)


def _emit(args, rows) -> None:
    csv_text = rows_to_csv(rows, include_timing=args.timings)
    if args.output:
        Path(args.output).write_text(csv_text)
        out = sys.stdout
    else:
        sys.stdout.write(csv_text)
        out = sys.stderr
    for s in sweep_report(rows):
        sig = "n/a (no prunable arcs)" if s.sigma_mean is None else f"{s.sigma_mean:.2f}%"
        fi = "n/a (no traffic)" if s.fairness_mean is None else f"{s.fairness_mean:.4f}"
        print(
            f"{s.algorithm} lambda={s.lam:g} th={s.threshold:g} runs={s.n} "
            f"sigma={sig} rho={s.rho_mean:.2f}% FI={fi} max_util={s.max_utilization_mean:.3f}",
            file=out,
        )
    if getattr(args, "summary", None):
        Path(args.summary).write_text(summary_to_csv(sweep_report(rows)))


def cmd_run(args) -> int:
    scenario = _scenario(args, (1.0,))
    _emit(args, run_scenario(scenario, workers=args.workers))
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _scenario(args, DEFAULT_THRESHOLDS)
    _emit(args, run_scenario(scenario, workers=args.workers))
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _scenario(args, DEFAULT_THRESHOLDS)
    _emit(args, run_comparison(scenario, workers=args.workers))
    return EXIT_OK


def _add_scenario_flags(p: argparse.ArgumentParser, with_algorithm: bool = True) -> None:
    p.add_argument("--config", help="scenario file of key=value lines; flags override it")
    p.add_argument("--topology", help="adjacency-matrix file, or random:NODES:LINKS[:LOW:HIGH]")
    p.add_argument("--nodes", type=int, help="generate topologies with this many bridges")
    p.add_argument("--links", type=int, help="directed arcs per generated topology")
    p.add_argument("--energy-range", type=_energy_range, help="arc energy range LOW,HIGH")
    if with_algorithm:
        p.add_argument("--algorithm", type=str.lower, choices=("ear", "meeafs"))
    p.set_defaults(algorithm=None)
    p.add_argument("--lambda", dest="lam", type=float, help="Poisson demand rate per ordered pair")
    p.add_argument("--thresholds", type=_thresholds, help="list a,b,c or grid start:stop:step")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="base seed; run r uses seed+r (required)")
    p.add_argument("--mu", type=float, help="maximum link utilization for violation counts")
    p.add_argument("--cost", choices=("energy", "hop"), help="shortest-path arc cost")
    p.add_argument("--capacity", type=float, help="capacity of every arc")
    p.add_argument("--name", help="scenario id written to the CSV")
    p.add_argument("--output", "-o", help="CSV path (default: standard output)")
    p.add_argument("--summary", help="also write the per-threshold mean summary CSV here")
    p.add_argument("--timings", action="store_true", help="add wall_time_ms (breaks byte-reproducibility)")
    p.add_argument("--workers", type=int, default=1, help="processes for independent runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="energyfwd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random connected topology as an adjacency matrix")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--links", type=int, required=True, help="directed arcs (even)")
    g.add_argument("--energy-range", type=_energy_range, default=(0.1, 0.5))
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--output", "-o", required=True, help="matrix path, or - for standard output")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check a topology file's invariants")
    v.add_argument("topology")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="run one algorithm (default threshold 1.0)")
    _add_scenario_flags(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run one algorithm over a threshold grid (default 0:1:0.05)")
    _add_scenario_flags(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="run EAR and MEEAFS on the same seeds")
    _add_scenario_flags(c, with_algorithm=False)
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    except (TopologyError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ScenarioError as exc:
        cause = exc.__cause__
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(cause, (TopologyError, OSError)) else EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
