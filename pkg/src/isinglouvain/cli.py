"""Command-line interface: ``isinglouvain {cluster,compare,qubo-stats}``.

Exit codes: 0 success, 1 input/IO error, 2 invalid hyperparameters,
3 remote solver unavailable.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .graph import BUILTIN_GRAPHS, DATASETS, EdgeListError, Graph, builtin_graph, load_dataset, load_edge_list
from .ising_louvain import Hyperparams, HyperparamError, ising_louvain
from .louvain import louvain
from .modularity import modularity
from .remote import RemoteUnavailable
from .reports import RunReport, box_summary, histogram, quartiles, reference_values, write_partition

log = logging.getLogger("isinglouvain")

EXIT_OK, EXIT_IO, EXIT_HYPERPARAMS, EXIT_REMOTE = 0, 1, 2, 3

CSV_COLUMNS = ["graph", "algorithm", "seed", "modularity", "clusters", "solver_calls", "avg_qubo_size", "wall_ms"]


def _gamma(text: str) -> float | None:
    if text.lower() == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"gamma must be 'auto' or a number, got {text!r}") from None


def _add_graph_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--graph", required=True,
                    help=f"builtin/dataset name ({', '.join(sorted({*BUILTIN_GRAPHS, *DATASETS}))}) or edge-list path")
    ap.add_argument("--weighted", action="store_true", help="read a third column as edge weight")


def _add_hyperparam_args(ap: argparse.ArgumentParser) -> None:
    d = Hyperparams()
    ap.add_argument("--max-nodes", type=int, default=d.max_nodes)
    ap.add_argument("--max-clusters", type=int, default=d.max_clusters)
    ap.add_argument("--max-node-visits", type=int, default=d.max_node_visits)
    ap.add_argument("--solver-timeout", type=float, default=d.solver_timeout, help="seconds per solver call")
    ap.add_argument("--bfs-depth", type=int, default=d.bfs_depth)
    ap.add_argument("--gamma", type=_gamma, default=None, help="penalty weight, or 'auto' (max degree)")
    ap.add_argument("--counter-max-out", type=int, default=d.counter_max_out)
    ap.add_argument("--counter-max-in", type=int, default=d.counter_max_in)
    ap.add_argument("--theta", type=float, default=d.theta)
    ap.add_argument("--node-strategy", default=d.node_strategy, help="bfs | random | sliding_window")
    ap.add_argument("--cluster-strategy", default=d.cluster_strategy, help="semi_greedy | bfs")
    ap.add_argument("--solver", default=d.solver, help="auto | exhaustive | sa | greedy | remote")
    ap.add_argument("--endpoint", default=None, help="URL of a remote solver")
    ap.add_argument("--sa-sweeps", type=int, default=None)


def _hyperparams(args, seed: int) -> Hyperparams:
    hp = Hyperparams(
        max_nodes=args.max_nodes,
        max_clusters=args.max_clusters,
        max_node_visits=args.max_node_visits,
        random_seed=seed,
        solver_timeout=args.solver_timeout,
        bfs_depth=args.bfs_depth,
        gamma=args.gamma,
        counter_max_out=args.counter_max_out,
        counter_max_in=args.counter_max_in,
        theta=args.theta,
        node_strategy=args.node_strategy,
        cluster_strategy=args.cluster_strategy,
        solver=args.solver,
        endpoint=args.endpoint,
        sa_sweeps=args.sa_sweeps,
    )
    hp.validate()
    return hp


def resolve_graph(source: str, weighted: bool = False) -> tuple[str, Graph]:
    """Map a ``--graph`` value to ``(name, Graph)``."""
    if source in BUILTIN_GRAPHS:
        return source, builtin_graph(source)
    if source in DATASETS:
        return source, load_dataset(source)
    if not os.path.isfile(source):
        raise FileNotFoundError(f"no such graph file or builtin: {source}")
    name = os.path.splitext(os.path.basename(source))[0]
    return name, load_edge_list(source, weighted=weighted)


def run_algorithm(g: Graph, algorithm: str, seed: int, hp: Hyperparams | None, theta: float = 1e-7):
    """Run one algorithm; returns ``(partition, stats_dict)``."""
    if algorithm == "louvain":
        t0 = time.perf_counter()
        part, trace = louvain(g, seed=seed, theta=theta)
        stats = {"solver_calls": 0, "qubo_sizes": [], "modularity_trace": [list(t) for t in trace],
                 "wall_time": time.perf_counter() - t0, "avg_qubo_size": 0.0}
        return part, stats
    part, run_stats = ising_louvain(g, hp)
    return part, run_stats.to_dict()


def _report(name: str, g: Graph, algorithm: str, seed: int, hp: Hyperparams, part, stats: dict) -> RunReport:
    sizes = stats.get("qubo_sizes") or []
    return RunReport(
        graph_name=name,
        n=g.n,
        m=g.m,
        algorithm=algorithm,
        seed=seed,
        final_modularity=modularity(g, part),
        num_clusters=len(part),
        hyperparams=hp.to_dict() if algorithm == "ising" else {"theta": hp.theta},
        stats=stats,
        qubo_size_quartiles=list(quartiles(sizes)) if sizes else None,
    )


def cmd_cluster(args) -> int:
    name, g = resolve_graph(args.graph, args.weighted)
    hp = _hyperparams(args, args.seed)
    part, stats = run_algorithm(g, args.algorithm, args.seed, hp, hp.theta)
    report = _report(name, g, args.algorithm, args.seed, hp, part, stats)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.join(args.out, f"{name}.{args.algorithm}.seed{args.seed}")
    write_partition(stem + ".partition.txt", g, part)
    report.save(stem + ".report.json")
    print(f"{name}: n={g.n} m={g.m:g} algorithm={args.algorithm} seed={args.seed} "
          f"Q={report.final_modularity:.6f} clusters={report.num_clusters}")
    print(f"wrote {stem}.partition.txt and {stem}.report.json")
    return EXIT_OK


def _compare_job(job):
    source, weighted, algorithm, seed, hp = job
    name, g = resolve_graph(source, weighted)
    part, stats = run_algorithm(g, algorithm, seed, hp, hp.theta)
    return {
        "graph": name,
        "algorithm": algorithm,
        "seed": seed,
        "modularity": modularity(g, part),
        "clusters": len(part),
        "solver_calls": stats.get("solver_calls", 0),
        "avg_qubo_size": stats.get("avg_qubo_size", 0.0),
        "wall_ms": int(round(stats.get("wall_time", 0.0) * 1000)),
    }


def cmd_compare(args) -> int:
    if args.runs < 1:
        raise HyperparamError("--runs must be >= 1")
    name, _ = resolve_graph(args.graph, args.weighted)
    algorithms = ["louvain", "ising"] if args.algorithm == "both" else [args.algorithm]
    jobs = []
    for algorithm in algorithms:
        for r in range(args.runs):
            seed = args.seed + r
            jobs.append((args.graph, args.weighted, algorithm, seed, _hyperparams(args, seed)))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_compare_job, jobs))
    else:
        rows = [_compare_job(j) for j in jobs]

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{name}.compare.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    print(f"{name}: {args.runs} runs per algorithm")
    print(f"{'algorithm':<10} {'best':>8} {'mean':>8} {'std':>8}")
    for algorithm in algorithms:
        qs = np.array([r["modularity"] for r in rows if r["algorithm"] == algorithm])
        print(f"{algorithm:<10} {qs.max():8.4f} {qs.mean():8.4f} {qs.std():8.4f}")
    ref = reference_values().get(name)
    if ref:
        print(f"published ({ref['display_name']}): leiden={ref['leiden']:.4f} "
              f"louvain={ref['louvain']:.4f} ising_louvain={ref['ising_louvain']:.4f}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_qubo_stats(args) -> int:
    report = RunReport.load(args.report)
    sizes = report.stats.get("qubo_sizes") or []
    if not sizes:
        print("no QUBO calls")
        return EXIT_OK
    s = box_summary(sizes)
    print(f"QUBO sizes for {report.graph_name} ({report.algorithm}, seed {report.seed}): {s['count']} calls")
    print(f"  min={s['min']:g}  Q1={s['q1']:g}  median={s['median']:g}  Q3={s['q3']:g}  max={s['max']:g}")
    print(f"  whiskers: [{s['whisker_low']:g}, {s['whisker_high']:g}]  outliers: {s['outliers']}")
    print(histogram(sizes, bins=args.bins))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isinglouvain", description="Modularity clustering with QUBO-based moves.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", help="cluster one graph and write partition + report")
    _add_graph_args(c)
    c.add_argument("--algorithm", choices=["ising", "louvain"], default="ising")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=".", help="output directory")
    _add_hyperparam_args(c)
    c.set_defaults(func=cmd_cluster)

    k = sub.add_parser("compare", help="best/mean/std modularity over several seeds")
    _add_graph_args(k)
    k.add_argument("--algorithm", choices=["both", "ising", "louvain"], default="both")
    k.add_argument("--runs", type=int, default=20)
    k.add_argument("--seed", type=int, default=0, help="first seed")
    k.add_argument("--jobs", type=int, default=1, help="worker processes")
    k.add_argument("--out", default=".", help="output directory for the CSV")
    _add_hyperparam_args(k)
    k.set_defaults(func=cmd_compare)

    q = sub.add_parser("qubo-stats", help="summarize QUBO sizes from a run report")
    q.add_argument("report")
    q.add_argument("--bins", type=int, default=10)
    q.set_defaults(func=cmd_qubo_stats)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except HyperparamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPERPARAMS
    except RemoteUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (OSError, EdgeListError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
