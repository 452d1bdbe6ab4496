"""Classic greedy Louvain, used as the baseline."""

from __future__ import annotations

import numpy as np

from .graph import Graph, aggregate
from .modularity import modularity, single_move_gain
from .partition import Partition

__all__ = ["louvain", "local_moving", "flatten", "GAIN_EPS"]

# Gains at or below this are treated as zero; keeps float noise from
# producing endless zero-gain moves.
GAIN_EPS = 1e-12


def local_moving(p: Partition, rng: np.random.Generator) -> bool:
    """One sweep moving each node to its best neighboring cluster.

    Nodes are visited in a random order.  A node moves only for a strictly
    positive gain; ties go to the lowest cluster id.

    Returns:
        Whether any node moved.
    """
    moved = False
    for i in rng.permutation(p.graph.n):
        i = int(i)
        own = p.assignment[i]
        links = p.links_to_clusters(i)
        best_c, best_gain = own, GAIN_EPS
        for c in sorted(links):
            if c == own:
                continue
            gain = single_move_gain(p, i, c, links)
            if gain > best_gain:
                best_c, best_gain = c, gain
        if best_c != own:
            p.move(i, best_c)
            moved = True
    return moved


def flatten(g: Graph, mapping: np.ndarray, top: Partition) -> Partition:
    """Project a partition of the coarsest graph back onto ``g``."""
    return Partition(g, [top.assignment[int(s)] for s in mapping])


def louvain(g: Graph, seed: int = 0, theta: float = 1e-7) -> tuple[Partition, list[tuple[int, int, float]]]:
    """Run Louvain until a level ends with every cluster a singleton.

    Args:
        g: Graph with positive total weight.
        seed: Seed for the per-pass node order.
        theta: A level's local-moving phase stops once a pass improves
            modularity by less than this.

    Returns:
        The partition of the original nodes and the modularity trace as
        ``(level, pass, Q)`` entries; pass 0 of each level is its starting
        point.
    """
    if g.m <= 0:
        raise ValueError("graph has no edge weight")
    rng = np.random.default_rng(seed)
    graph = g
    mapping = np.arange(g.n)
    trace: list[tuple[int, int, float]] = []
    level = 0
    while True:
        p = Partition.singleton(graph)
        q = modularity(graph, p)
        trace.append((level, 0, q))
        n_pass = 0
        while True:
            n_pass += 1
            moved = local_moving(p, rng)
            q_new = modularity(graph, p)
            trace.append((level, n_pass, q_new))
            gained = q_new - q
            q = q_new
            if not moved or gained < theta:
                break
        if len(p) == graph.n:
            break
        graph, sub = aggregate(graph, p)
        mapping = sub[mapping]
        level += 1
    return flatten(g, mapping, Partition.singleton(graph)), trace
