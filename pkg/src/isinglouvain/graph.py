"""Weighted undirected graphs, edge-list loading and cluster aggregation.

Self-loops follow the convention that a loop of weight ``w`` on node ``i``
adds ``2 * w`` to the weighted degree ``k_i``.  Under this convention the
modularity of a partition is preserved exactly when every cluster is
collapsed into a supernode.
"""

from __future__ import annotations

import os
from collections.abc import Hashable, Iterable, Sequence
from importlib import resources
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .partition import Partition

__all__ = [
    "Graph",
    "EdgeListError",
    "load_edge_list",
    "builtin_graph",
    "load_dataset",
    "aggregate",
    "BUILTIN_GRAPHS",
    "DATASETS",
]


class EdgeListError(ValueError):
    """Raised for malformed or empty edge-list input."""


class Graph:
    """Immutable weighted undirected graph on dense node ids ``0..n-1``.

    Args:
        n: Number of nodes.
        edges: Iterable of ``(u, v, w)`` triples or unit-weight ``(u, v)``
            pairs.  Parallel edges are merged
            by summing weights; ``u == v`` adds to the node's self-loop.
        labels: Optional external label for every node.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, float] | tuple[int, int]],
        labels: Sequence[Hashable] | None = None,
    ) -> None:
        if n < 0:
            raise ValueError("n must be nonnegative")
        adj: list[dict[int, float]] = [{} for _ in range(n)]
        loops = np.zeros(n)
        for edge in edges:
            u, v, w = edge if len(edge) == 3 else (*edge, 1.0)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if w < 0:
                raise ValueError(f"negative weight on edge ({u}, {v})")
            if u == v:
                loops[u] += w
            else:
                adj[u][v] = adj[u].get(v, 0.0) + w
                adj[v][u] = adj[v].get(u, 0.0) + w
        self._n = n
        self._adj = adj
        self._loops = loops
        self._loops.flags.writeable = False
        deg = np.array([sum(a.values()) for a in adj], dtype=float) + 2.0 * loops
        deg.flags.writeable = False
        self._deg = deg
        self._m = float(deg.sum()) / 2.0
        self._labels = list(labels) if labels is not None else list(range(n))
        if len(self._labels) != n:
            raise ValueError("labels must have one entry per node")

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> float:
        """Total edge weight (half the sum of weighted degrees)."""
        return self._m

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degrees ``k_i`` as a read-only array."""
        return self._deg

    @property
    def self_loops(self) -> np.ndarray:
        return self._loops

    @property
    def labels(self) -> list:
        return self._labels

    def degree(self, i: int) -> float:
        return float(self._deg[i])

    def self_loop(self, i: int) -> float:
        return float(self._loops[i])

    def neighbors(self, i: int) -> dict[int, float]:
        """Neighbor -> weight mapping of node ``i`` (self-loop excluded).

        The returned dict is shared; callers must not mutate it.
        """
        return self._adj[i]

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return float(self._loops[i])
        return self._adj[i].get(j, 0.0)

    def edges(self) -> Iterable[tuple[int, int, float]]:
        """Yield each edge once as ``(u, v, w)`` with ``u <= v``."""
        for u in range(self._n):
            if self._loops[u] > 0:
                yield u, u, float(self._loops[u])
            for v, w in self._adj[u].items():
                if u < v:
                    yield u, v, w

    @property
    def num_edges(self) -> int:
        """Number of distinct edges, self-loops included."""
        return sum(len(a) for a in self._adj) // 2 + int(np.count_nonzero(self._loops))

    def adjacency_matrix(self) -> np.ndarray:
        """Dense adjacency with ``A[i, i] = 2 * self_loop(i)``."""
        A = np.zeros((self._n, self._n))
        for u in range(self._n):
            for v, w in self._adj[u].items():
                A[u, v] = w
            A[u, u] = 2.0 * self._loops[u]
        return A

    def scaled(self, factor: float) -> Graph:
        """Copy of the graph with every weight multiplied by ``factor``."""
        return Graph(self._n, ((u, v, w * factor) for u, v, w in self.edges()), self._labels)

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self._m:g})"


def _parse_label(token: str) -> Hashable:
    try:
        return int(token)
    except ValueError:
        return token


def load_edge_list(path: str | os.PathLike, weighted: bool = False) -> Graph:
    """Read a SNAP-style edge list.

    Each non-comment line holds ``u v`` or ``u v w``; lines starting with
    ``#`` (or ``%``) are skipped.  Labels are remapped to dense ids in order
    of first appearance and kept on ``Graph.labels``.  With ``weighted``
    false every edge counts 1 and any third column is ignored.
    """
    ids: dict[Hashable, int] = {}
    labels: list[Hashable] = []
    edges: list[tuple[int, int, float]] = []

    def node(token: str) -> int:
        key = _parse_label(token)
        idx = ids.get(key)
        if idx is None:
            idx = ids[key] = len(labels)
            labels.append(key)
        return idx

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            parts = s.split()
            if len(parts) not in (2, 3):
                raise EdgeListError(f"{path}:{lineno}: expected 2 or 3 fields, got {len(parts)}")
            w = 1.0
            if weighted and len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(f"{path}:{lineno}: bad weight {parts[2]!r}") from None
                if w < 0 or not np.isfinite(w):
                    raise EdgeListError(f"{path}:{lineno}: weight must be finite and >= 0")
            edges.append((node(parts[0]), node(parts[1]), w))
    if not edges:
        raise EdgeListError(f"{path}: no edges")
    return Graph(len(labels), edges, labels)


# Shipped data files: name -> (file, weighted)
DATASETS = {
    "karate": ("karate.txt", False),
    "lesmiserables": ("lesmiserables.txt", True),
    "meredith": ("meredith.txt", False),
}


def load_dataset(name: str) -> Graph:
    """Load one of the edge lists bundled with the package."""
    try:
        fname, weighted = DATASETS[name]
    except KeyError:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(DATASETS)}") from None
    with resources.as_file(resources.files(__package__) / "data" / fname) as p:
        return load_edge_list(p, weighted=weighted)


def _two_triangles() -> Graph:
    return Graph(6, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1), (2, 3, 1)])


# Seven nodes where, from FIGURE2_PARTITION, no single-node move (to any
# existing cluster or a new one) raises modularity, yet moving nodes 3 and 6
# together into cluster 0 does.  Found by randomized search over Louvain
# stall points and certified exhaustively in the tests.
_FIGURE2_EDGES = [(3, 6), (0, 1), (0, 4), (1, 5), (2, 4), (2, 6), (3, 4)]
FIGURE2_PARTITION = [0, 1, 0, 1, 0, 1, 1]
FIGURE2_MOVES = {3: 0, 6: 0}


def _figure2_case() -> Graph:
    return Graph(7, [(u, v, 1.0) for u, v in _FIGURE2_EDGES])


BUILTIN_GRAPHS = {
    "karate": lambda: load_dataset("karate"),
    "two_triangles": _two_triangles,
    "figure2_case": _figure2_case,
}


def builtin_graph(name: str) -> Graph:
    """Return one of the built-in graphs: karate, two_triangles, figure2_case."""
    try:
        factory = BUILTIN_GRAPHS[name]
    except KeyError:
        raise ValueError(f"unknown builtin graph {name!r}; choose from {sorted(BUILTIN_GRAPHS)}") from None
    return factory()


def aggregate(g: Graph, p: Partition) -> tuple[Graph, np.ndarray]:
    """Collapse every cluster of ``p`` into a supernode.

    Supernodes are numbered by ascending cluster id.  Intra-cluster edges
    become a self-loop on the supernode (each edge counted once, member
    self-loops added), so the total weight ``m`` is unchanged.

    Returns:
        The coarse graph and an array mapping each node of ``g`` to its
        supernode.
    """
    order = {c: idx for idx, c in enumerate(sorted(p.clusters))}
    mapping = np.fromiter((order[c] for c in p.assignment), dtype=np.int64, count=g.n)
    acc: dict[tuple[int, int], float] = {}
    for u, v, w in g.edges():
        a, b = int(mapping[u]), int(mapping[v])
        key = (a, b) if a <= b else (b, a)
        acc[key] = acc.get(key, 0.0) + w
    coarse = Graph(len(order), ((a, b, w) for (a, b), w in acc.items()))
    return coarse, mapping
