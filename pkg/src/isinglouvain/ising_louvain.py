"""Louvain-style hierarchical clustering driven by local QUBO subproblems.

Instead of moving one node at a time, each step frees a small set of nodes
around an anchor, shortlists candidate clusters for each of them, and asks a
QUBO solver for the best joint reassignment.  The reassignment is kept only
if it raises modularity.  Levels are coarsened exactly as in Louvain.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Graph, aggregate
from .louvain import GAIN_EPS, flatten
from .modularity import mod_gain, modularity, single_move_gain
from .partition import Partition
from .qubo import InfeasibleSolution, LocalProblem, build_qubo, decode
from .solvers import REMOTE_CAPACITY, TARGETS, SolveRequest, solve

__all__ = [
    "Hyperparams",
    "HyperparamError",
    "RunStats",
    "ising_louvain",
    "run_one_pass",
    "select_nodes",
    "select_clusters",
    "greedy_shortcut",
]

log = logging.getLogger(__name__)

NODE_STRATEGIES = ("bfs", "random", "sliding_window")
CLUSTER_STRATEGIES = ("semi_greedy", "bfs")


class HyperparamError(ValueError):
    pass


@dataclass
class Hyperparams:
    """Tunables of the algorithm.

    ``gamma=None`` selects the automatic penalty: the largest weighted
    degree of the current level's graph, refreshed after each aggregation.
    ``solver`` is one of ``auto``, ``exhaustive``, ``sa``, ``greedy`` or
    ``remote`` (which needs ``endpoint``).
    """

    max_nodes: int = 30
    max_clusters: int = 4
    max_node_visits: int = 2
    random_seed: int = 0
    solver_timeout: float = 10.0
    bfs_depth: int = 2
    gamma: float | None = None
    counter_max_out: int = 20
    counter_max_in: int = 20
    theta: float = 1e-7
    node_strategy: str = "bfs"
    cluster_strategy: str = "semi_greedy"
    solver: str = "auto"
    endpoint: str | None = None
    sa_sweeps: int | None = None

    def validate(self) -> None:
        for name in ("max_nodes", "max_clusters", "max_node_visits", "bfs_depth", "counter_max_out", "counter_max_in"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise HyperparamError(f"{name} must be an integer >= 1, got {value!r}")
        if not self.solver_timeout > 0:
            raise HyperparamError("solver_timeout must be positive")
        if self.theta < 0:
            raise HyperparamError("theta must be >= 0")
        if self.gamma is not None and self.gamma < 0:
            raise HyperparamError("gamma must be >= 0")
        if self.node_strategy not in NODE_STRATEGIES:
            raise HyperparamError(f"node_strategy must be one of {NODE_STRATEGIES}")
        if self.cluster_strategy not in CLUSTER_STRATEGIES:
            raise HyperparamError(f"cluster_strategy must be one of {CLUSTER_STRATEGIES}")
        if self.solver not in TARGETS:
            raise HyperparamError(f"solver must be one of {TARGETS}")
        if self.solver == "remote" and not self.endpoint:
            raise HyperparamError("remote solver needs an endpoint")
        if self.sa_sweeps is not None and self.sa_sweeps < 1:
            raise HyperparamError("sa_sweeps must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gamma"] = "auto" if self.gamma is None else self.gamma
        return d


@dataclass
class RunStats:
    solver_calls: int = 0
    qubo_sizes: list[int] = field(default_factory=list)
    greedy_shortcuts: int = 0
    single_candidate_eliminations: int = 0
    eliminated_variables: int = 0
    infeasible_solutions: int = 0
    accepted_updates: int = 0
    passes: int = 0
    levels: int = 0
    modularity_trace: list[tuple[int, int, float]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def avg_qubo_size(self) -> float:
        return float(np.mean(self.qubo_sizes)) if self.qubo_sizes else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["modularity_trace"] = [list(t) for t in self.modularity_trace]
        d["avg_qubo_size"] = self.avg_qubo_size
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunStats:
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        known["modularity_trace"] = [tuple(t) for t in known.get("modularity_trace", [])]
        return cls(**known)


def _bfs(g: Graph, start: int, depth: int):
    """Yield nodes reachable within ``depth`` hops, in discovery order."""
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        u, d = frontier.popleft()
        yield u
        if d == depth:
            continue
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                frontier.append((v, d + 1))


def select_nodes(
    g: Graph,
    p: Partition,
    anchor: int,
    hp: Hyperparams,
    visits: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    order: np.ndarray | None = None,
) -> list[int]:
    """Choose the free-node set around ``anchor``.

    Nodes that already reached ``max_node_visits`` in this pass are skipped.
    ``order`` is the pass's node order, used by the sliding-window strategy.
    """
    if visits is None:
        visits = np.zeros(g.n, dtype=np.int64)
    limit = hp.max_node_visits

    def ok(v: int) -> bool:
        return visits[v] < limit

    if hp.node_strategy == "bfs":
        out = []
        for v in _bfs(g, anchor, hp.bfs_depth):
            if ok(v):
                out.append(v)
                if len(out) == hp.max_nodes:
                    break
        return out
    if hp.node_strategy == "random":
        rng = rng if rng is not None else np.random.default_rng(hp.random_seed)
        pool = np.array([v for v in range(g.n) if v != anchor and ok(v)], dtype=np.int64)
        k = min(hp.max_nodes - 1, pool.size)
        picked = rng.choice(pool, size=k, replace=False).tolist() if k else []
        return ([anchor] if ok(anchor) else []) + [int(v) for v in picked]
    # sliding window over the pass order
    if order is None:
        order = np.arange(g.n)
    pos = int(np.nonzero(order == anchor)[0][0])
    out = []
    for step in range(g.n):
        v = int(order[(pos + step) % g.n])
        if ok(v):
            out.append(v)
            if len(out) == hp.max_nodes:
                break
    return out


def _rank_semi_greedy(p: Partition, node: int, k: int) -> list[int]:
    own = p.assignment[node]
    links = p.links_to_clusters(node)
    scored = [(0.0, own)]
    for c in links:
        if c != own:
            scored.append((single_move_gain(p, node, c, links), c))
    scored.sort(key=lambda t: (-t[0], t[1]))
    top = [c for _, c in scored[:k]]
    if own not in top:
        top[-1] = own
    return top


def _rank_bfs(g: Graph, p: Partition, node: int, k: int, depth: int, rng: np.random.Generator) -> list[int]:
    own = p.assignment[node]
    found = sorted({p.assignment[v] for v in _bfs(g, node, depth)} - {own})
    if len(found) > k - 1:
        found = sorted(int(c) for c in rng.choice(found, size=k - 1, replace=False))
    return [own] + found


def select_clusters(
    g: Graph,
    p: Partition,
    nodes: list[int],
    hp: Hyperparams,
    stats: RunStats | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[dict[int, list[int]], list[int], dict[int, int]]:
    """Shortlist candidate clusters for each free node.

    Every list starts from the node's current cluster.  Nodes left with a
    single candidate are dropped from the free set and returned as forced
    assignments instead.

    Returns:
        ``(candidates, reduced_nodes, forced_moves)``.
    """
    candidates: dict[int, list[int]] = {}
    reduced: list[int] = []
    forced: dict[int, int] = {}
    for i in nodes:
        if hp.cluster_strategy == "semi_greedy":
            cands = _rank_semi_greedy(p, i, hp.max_clusters)
        else:
            rng = rng if rng is not None else np.random.default_rng(hp.random_seed)
            cands = _rank_bfs(g, p, i, hp.max_clusters, hp.bfs_depth, rng)
        if len(cands) == 1:
            if cands[0] != p.assignment[i]:
                forced[i] = cands[0]
            if stats is not None:
                stats.single_candidate_eliminations += 1
                stats.eliminated_variables += 1
            continue
        candidates[i] = cands
        reduced.append(i)
    return candidates, reduced, forced


def greedy_shortcut(g: Graph, p: Partition, node: int, candidates: list[int]) -> dict[int, int]:
    """Best single-node move among ``candidates``; empty if none gains."""
    own = p.assignment[node]
    links = p.links_to_clusters(node)
    best_c, best_gain = own, GAIN_EPS
    for c in sorted(candidates):
        if c == own:
            continue
        gain = single_move_gain(p, node, c, links)
        if gain > best_gain:
            best_c, best_gain = c, gain
    return {} if best_c == own else {node: best_c}


def _solve_local(g, p, nodes, candidates, gamma, hp, stats, rng) -> dict[int, int]:
    cap = REMOTE_CAPACITY if hp.solver == "remote" else None
    nodes = list(nodes)
    while cap is not None and sum(len(candidates[i]) for i in nodes) > cap:
        nodes.pop()
    q = build_qubo(g, p, LocalProblem(tuple(nodes), candidates, gamma))
    req = SolveRequest(
        q,
        timeout=hp.solver_timeout,
        seed=int(rng.integers(2**31)),
        target=hp.solver,
        sweeps=hp.sa_sweeps,
        endpoint=hp.endpoint,
    )
    result = solve(req)
    stats.solver_calls += 1
    stats.qubo_sizes.append(q.num_vars)
    try:
        return decode(q, result.bits)
    except InfeasibleSolution as exc:
        stats.infeasible_solutions += 1
        log.info("solver returned infeasible assignment for nodes %s; keeping them in place", exc.nodes)
        return exc.partial


def run_one_pass(
    g: Graph,
    p: Partition,
    hp: Hyperparams,
    stats: RunStats,
    rng: np.random.Generator,
    gamma: float | None = None,
    visit_log: list[list[int]] | None = None,
) -> tuple[Partition, bool]:
    """One sweep of local subproblems over the graph, updating ``p`` in place.

    Anchors are taken from a shuffled node list (a randomly shifted sorted
    list for the sliding-window strategy).  An anchor already placed in some
    free set during this pass is skipped.  ``visit_log``, if given, receives
    every free set.
    """
    n = g.n
    if gamma is None:
        gamma = hp.gamma if hp.gamma is not None else float(g.degrees.max())
    visits = np.zeros(n, dtype=np.int64)
    if hp.node_strategy == "sliding_window":
        order = np.roll(np.arange(n), int(rng.integers(n)))
    else:
        order = rng.permutation(n)
    modified = False
    for anchor in order:
        anchor = int(anchor)
        if visits[anchor] > 0:
            continue
        nodes = select_nodes(g, p, anchor, hp, visits, rng, order)
        if not nodes:
            continue
        visits[nodes] += 1
        if visit_log is not None:
            visit_log.append(list(nodes))
        candidates, reduced, forced = select_clusters(g, p, nodes, hp, stats, rng)
        if not reduced:
            moves = {}
        elif len(reduced) == 1:
            stats.greedy_shortcuts += 1
            moves = greedy_shortcut(g, p, reduced[0], candidates[reduced[0]])
        else:
            moves = _solve_local(g, p, reduced, candidates, gamma, hp, stats, rng)
        moves.update(forced)
        if moves and mod_gain(g, p, moves) > GAIN_EPS:
            p.apply(moves)
            stats.accepted_updates += 1
            modified = True
    return p, modified


def ising_louvain(
    g: Graph,
    hp: Hyperparams | None = None,
    initial: Partition | None = None,
) -> tuple[Partition, RunStats]:
    """Cluster ``g`` by hierarchical modularity maximization with QUBO moves.

    The outer loop coarsens the graph after each round of passes; it ends
    when a round leaves every cluster a singleton, when it has run
    ``counter_max_out + 1`` times, or when a round gains less than
    ``theta``.  The inner loop repeats passes while they change the
    partition, up to ``counter_max_in + 1`` times, and while each gains at
    least ``theta``.

    Args:
        g: Graph with positive total weight.
        hp: Hyperparameters; defaults if omitted.
        initial: Starting partition of ``g`` (singletons if omitted).

    Returns:
        The partition of the original nodes and the run statistics.
    """
    hp = hp or Hyperparams()
    hp.validate()
    if g.m <= 0:
        raise ValueError("graph has no edge weight")
    t0 = time.perf_counter()
    rng = np.random.default_rng(hp.random_seed)
    stats = RunStats()
    graph = g
    p = initial.copy() if initial is not None else Partition.singleton(g)
    mapping = np.arange(g.n)
    gamma = hp.gamma if hp.gamma is not None else float(graph.degrees.max())
    level = 0
    theta = hp.theta
    stats.modularity_trace.append((level, 0, modularity(graph, p)))

    counter_out = 0
    dq_out = theta
    done = False
    while not done and counter_out <= hp.counter_max_out and dq_out >= theta:
        counter_out += 1
        counter_in = 0
        q_old_out = modularity(graph, p)
        dq_in = theta
        modified = True
        while modified and counter_in <= hp.counter_max_in and dq_in >= theta:
            counter_in += 1
            q_old_in = modularity(graph, p)
            p, modified = run_one_pass(graph, p, hp, stats, rng, gamma)
            q_new_in = modularity(graph, p)
            dq_in = q_new_in - q_old_in
            stats.passes += 1
            stats.modularity_trace.append((level, counter_in, q_new_in))
        dq_out = modularity(graph, p) - q_old_out
        if len(p) == graph.n:
            done = True
        else:
            graph, sub = aggregate(graph, p)
            mapping = sub[mapping]
            p = Partition.singleton(graph)
            level += 1
            if hp.gamma is None:
                gamma = float(graph.degrees.max())
    stats.levels = level + 1
    stats.wall_time = time.perf_counter() - t0
    return flatten(g, mapping, p), stats
