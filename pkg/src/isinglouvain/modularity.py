"""Modularity, incremental move gains and an exhaustive small-graph oracle."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np

from .graph import Graph
from .partition import NEW_CLUSTER, Partition, normalize_moves

__all__ = [
    "modularity",
    "mod_gain",
    "single_move_gain",
    "apply_moves",
    "brute_force_best",
    "set_partitions",
    "BRUTE_FORCE_MAX_NODES",
]

BRUTE_FORCE_MAX_NODES = 12


def modularity(g: Graph, p: Partition | Iterable[int]) -> float:
    """Newman modularity of the assignment ``p`` on ``g``.

    Evaluated from scratch with the per-cluster form
    ``sum_c [in_c / m - (tot_c / 2m)^2]``, where ``in_c`` counts each
    intra-cluster edge and each member self-loop once.
    """
    m = g.m
    if m <= 0:
        raise ValueError("modularity is undefined for a graph with no edge weight")
    assignment = p.assignment if isinstance(p, Partition) else list(p)
    internal: dict[int, float] = {}
    total: dict[int, float] = {}
    deg = g.degrees
    for i, c in enumerate(assignment):
        total[c] = total.get(c, 0.0) + float(deg[i])
    for u, v, w in g.edges():
        c = assignment[u]
        if c == assignment[v]:
            internal[c] = internal.get(c, 0.0) + w
    two_m = 2.0 * m
    return sum(internal.values()) / m - sum((t / two_m) ** 2 for t in total.values())


def single_move_gain(p: Partition, node: int, target: int, links: Mapping[int, float] | None = None) -> float:
    """Modularity change from moving one node to ``target``.

    ``links`` may pass a precomputed :meth:`Partition.links_to_clusters`.
    """
    src = p.assignment[node]
    if target == src:
        return 0.0
    g = p.graph
    m = g.m
    if links is None:
        links = p.links_to_clusters(node)
    k = float(g.degrees[node])
    tot_src = p.cluster_degree[src] - k
    tot_dst = 0.0 if target == NEW_CLUSTER else p.cluster_degree[target]
    d_links = (0.0 if target == NEW_CLUSTER else links.get(target, 0.0)) - links.get(src, 0.0)
    return d_links / m - k * (tot_dst - tot_src) / (2.0 * m * m)


def mod_gain(g: Graph, p: Partition, moves: Mapping[int, int] | Iterable[tuple[int, int]]) -> float:
    """Modularity change if ``p`` were updated with ``moves``.

    Runs in time proportional to the total degree of the moved nodes and
    leaves ``p`` untouched.  Each ``NEW_CLUSTER`` target stands for its own
    fresh singleton cluster.
    """
    moves = normalize_moves(moves)
    a = p.assignment
    new: dict[int, object] = {}
    for idx, (node, target) in enumerate(moves.items()):
        if target == NEW_CLUSTER:
            new[node] = ("new", idx)
        elif target != a[node]:
            if target not in p.clusters:
                raise ValueError(f"unknown target cluster {target}")
            new[node] = target
    if not new:
        return 0.0
    m = g.m
    deg = g.degrees

    def after(j: int):
        return new.get(j, a[j])

    d_in: dict[object, float] = {}
    d_tot: dict[object, float] = {}
    for u, cu_new in new.items():
        cu_old = a[u]
        k = float(deg[u])
        d_tot[cu_old] = d_tot.get(cu_old, 0.0) - k
        d_tot[cu_new] = d_tot.get(cu_new, 0.0) + k
        for v, w in g.neighbors(u).items():
            if v in new and v < u:
                continue  # edge already handled from the other moved end
            if a[v] == cu_old:
                d_in[cu_old] = d_in.get(cu_old, 0.0) - w
            cv_new = after(v)
            if cv_new == cu_new:
                d_in[cu_new] = d_in.get(cu_new, 0.0) + w
    # self-loops travel with their node, so they cancel out of the sum
    for u, cu_new in new.items():
        loop = float(g.self_loops[u])
        if loop:
            d_in[a[u]] = d_in.get(a[u], 0.0) - loop
            d_in[cu_new] = d_in.get(cu_new, 0.0) + loop
    four_m2 = 4.0 * m * m
    gain = sum(d_in.values()) / m
    for c, dt in d_tot.items():
        old = p.cluster_degree.get(c, 0.0) if not isinstance(c, tuple) else 0.0
        gain -= ((old + dt) ** 2 - old**2) / four_m2
    return gain


def apply_moves(p: Partition, moves: Mapping[int, int] | Iterable[tuple[int, int]]) -> Partition:
    """Return a copy of ``p`` with ``moves`` applied."""
    out = p.copy()
    out.apply(moves)
    return out


def set_partitions(n: int) -> np.ndarray:
    """All set partitions of ``n`` items as restricted growth strings.

    Rows are in lexicographic order, so row 0 is the all-in-one partition.
    """
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rgs = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        blocks, rows, new_max = [], [], []
        top = int(maxes.max()) + 1
        for v in range(top + 1):
            ok = maxes + 1 >= v
            rows.append(np.nonzero(ok)[0])
            blocks.append(np.full(int(ok.sum()), v, dtype=np.int8))
            new_max.append(np.maximum(maxes[ok], v))
        # stable lexicographic order: sort by (parent row, appended value)
        parent = np.concatenate(rows)
        val = np.concatenate(blocks)
        order = np.lexsort((val, parent))
        rgs = np.hstack([rgs[parent[order]], val[order, None]])
        maxes = np.concatenate(new_max)[order].astype(np.int8)
    return rgs


def brute_force_best(g: Graph, chunk: int = 1 << 16) -> tuple[Partition, float]:
    """Exhaustively maximize modularity over every set partition.

    Ties resolve to the lexicographically first restricted growth string.

    Raises:
        ValueError: if ``g`` has more than ``BRUTE_FORCE_MAX_NODES`` nodes.
    """
    n = g.n
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"brute force refused for n={n} > {BRUTE_FORCE_MAX_NODES}")
    if g.m <= 0:
        raise ValueError("modularity is undefined for a graph with no edge weight")
    k = g.degrees
    B = (g.adjacency_matrix() - np.outer(k, k) / (2.0 * g.m)) / (2.0 * g.m)
    parts = set_partitions(n)
    best_q, best_row = -np.inf, 0
    for start in range(0, len(parts), chunk):
        block = parts[start : start + chunk]
        same = block[:, :, None] == block[:, None, :]
        q = np.einsum("rij,ij->r", same, B)
        top = float(q.max())
        idx = int(np.argmax(q >= top - 1e-12))
        if top > best_q + 1e-12:
            best_q, best_row = float(q[idx]), start + idx
    best = Partition(g, parts[best_row].tolist())
    return best, modularity(g, best)
