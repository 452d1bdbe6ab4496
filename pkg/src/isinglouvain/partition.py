"""Mutable node-to-cluster assignment with incremental bookkeeping."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

from .graph import Graph

__all__ = ["Partition", "NEW_CLUSTER", "normalize_moves"]

#: Move target meaning "a fresh singleton cluster".
NEW_CLUSTER = -1


def normalize_moves(moves: Mapping[int, int] | Iterable[tuple[int, int]]) -> dict[int, int]:
    """Turn a move set into ``{node: target}``, rejecting repeated nodes."""
    if isinstance(moves, Mapping):
        return dict(moves)
    out: dict[int, int] = {}
    for node, target in moves:
        if node in out:
            raise ValueError(f"node {node} appears twice in move set")
        out[node] = target
    return out


class Partition:
    """Assignment of every node of ``graph`` to exactly one cluster.

    Alongside the assignment the partition keeps, per cluster, its member
    set, the degree sum ``sum k_i`` and the internal weight (intra-cluster
    edges once, member self-loops once).  Empty clusters are dropped as soon
    as they appear; ids of surviving clusters never change.
    """

    def __init__(self, graph: Graph, assignment: Sequence[int]) -> None:
        if len(assignment) != graph.n:
            raise ValueError("assignment length must equal number of nodes")
        self.graph = graph
        self.assignment = [int(c) for c in assignment]
        if any(c < 0 for c in self.assignment):
            raise ValueError("cluster ids must be nonnegative")
        self.clusters: dict[int, set[int]] = {}
        self.cluster_degree: dict[int, float] = {}
        self.cluster_internal: dict[int, float] = {}
        deg = graph.degrees
        for i, c in enumerate(self.assignment):
            self.clusters.setdefault(c, set()).add(i)
            self.cluster_degree[c] = self.cluster_degree.get(c, 0.0) + float(deg[i])
        for c in self.clusters:
            self.cluster_internal[c] = 0.0
        for u, v, w in graph.edges():
            cu = self.assignment[u]
            if cu == self.assignment[v]:
                self.cluster_internal[cu] += w
        self._next_id = max(self.clusters, default=-1) + 1

    @classmethod
    def singleton(cls, graph: Graph) -> Partition:
        return cls(graph, range(graph.n))

    @classmethod
    def whole(cls, graph: Graph) -> Partition:
        """All nodes in cluster 0."""
        return cls(graph, [0] * graph.n)

    def copy(self) -> Partition:
        new = object.__new__(Partition)
        new.graph = self.graph
        new.assignment = list(self.assignment)
        new.clusters = {c: set(s) for c, s in self.clusters.items()}
        new.cluster_degree = dict(self.cluster_degree)
        new.cluster_internal = dict(self.cluster_internal)
        new._next_id = self._next_id
        return new

    def __len__(self) -> int:
        return len(self.clusters)

    def __getitem__(self, node: int) -> int:
        return self.assignment[node]

    def links_to_clusters(self, node: int) -> dict[int, float]:
        """Edge weight from ``node`` to each adjacent cluster (self-loop excluded)."""
        out: dict[int, float] = {}
        a = self.assignment
        for j, w in self.graph.neighbors(node).items():
            c = a[j]
            out[c] = out.get(c, 0.0) + w
        return out

    def move(self, node: int, target: int) -> None:
        """Move one node, updating all per-cluster sums."""
        src = self.assignment[node]
        if target == NEW_CLUSTER:
            target = self._next_id
        if target == src:
            return
        g = self.graph
        k = float(g.degrees[node])
        loop = float(g.self_loops[node])
        to_src = to_dst = 0.0
        a = self.assignment
        for j, w in g.neighbors(node).items():
            cj = a[j]
            if cj == src:
                to_src += w
            elif cj == target:
                to_dst += w
        members = self.clusters[src]
        members.discard(node)
        if members:
            self.cluster_degree[src] -= k
            self.cluster_internal[src] -= to_src + loop
        else:
            del self.clusters[src]
            del self.cluster_degree[src]
            del self.cluster_internal[src]
        if target in self.clusters:
            self.clusters[target].add(node)
            self.cluster_degree[target] += k
            self.cluster_internal[target] += to_dst + loop
        else:
            self.clusters[target] = {node}
            self.cluster_degree[target] = k
            self.cluster_internal[target] = loop
        self._next_id = max(self._next_id, target + 1)
        a[node] = target

    def apply(self, moves: Mapping[int, int] | Iterable[tuple[int, int]]) -> None:
        """Apply a move set in place.

        Every ``NEW_CLUSTER`` target gets its own fresh cluster.
        """
        moves = normalize_moves(moves)
        for node, target in moves.items():
            if target != NEW_CLUSTER and target not in self.clusters:
                raise ValueError(f"unknown target cluster {target}")
        for node, target in moves.items():
            self.move(node, target)

    def labels(self) -> list[int]:
        """Assignment relabeled to dense ids ``0..K-1`` by ascending cluster id."""
        order = {c: idx for idx, c in enumerate(sorted(self.clusters))}
        return [order[c] for c in self.assignment]

    def check(self, tol: float = 1e-9) -> None:
        """Raise ``AssertionError`` if any bookkeeping invariant is violated."""
        fresh = Partition(self.graph, self.assignment)
        assert set(fresh.clusters) == set(self.clusters), "cluster ids out of sync"
        for c, members in fresh.clusters.items():
            assert members == self.clusters[c], f"members of {c} out of sync"
            assert abs(fresh.cluster_degree[c] - self.cluster_degree[c]) <= tol, f"degree sum of {c}"
            assert abs(fresh.cluster_internal[c] - self.cluster_internal[c]) <= tol, f"internal weight of {c}"

    def __repr__(self) -> str:
        return f"Partition(n={len(self.assignment)}, clusters={len(self.clusters)})"
