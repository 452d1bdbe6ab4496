"""Local QUBO subproblems for moving a set of free nodes between clusters.

A subproblem fixes every node outside the free set ``S`` and asks which of
its candidate clusters each free node should join.  Variable ``x[i, l]`` is
1 when free node ``i`` joins cluster ``l``.  Writing
``B_ij = k_i k_j / 2m - A_ij`` (with ``A_ii = 2 * self_loop(i)``), the
objective for one cluster ``l`` is

    sum_{i, j in S_l} x_il B_ij x_jl + 2 sum_{i in S_l} x_il sum_{j in C_l} B_ij

where ``C_l`` are the fixed (non-free) members of ``l``.  Summed over the
candidate clusters and combined with the one-hot penalty
``gamma * sum_i (sum_l x_il - 1)^2`` this gives the model built here.  For
any one-hot assignment the energy equals ``-2m`` times the modularity
contribution of the candidate clusters after the move, so energy
differences are exactly ``-2m`` times modularity gains.

The algorithm description names four coefficient blocks without defining
them; here the pairwise block lives in ``QuboModel.quadratic``, the fixed
cluster interactions and penalty terms are folded into ``linear`` and the
dropped constants into ``offset``.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import Graph
from .partition import Partition

__all__ = [
    "QuboModel",
    "LocalProblem",
    "SizeExceeded",
    "InfeasibleSolution",
    "build_qubo",
    "decode",
    "energy",
    "as_bits",
]


class SizeExceeded(ValueError):
    """The subproblem has more variables than the solver accepts."""


class InfeasibleSolution(ValueError):
    """A bitstring violates the one-hot constraint for some free nodes.

    Attributes:
        nodes: Free nodes with zero or several selected clusters.
        partial: Moves decoded for the nodes that were one-hot.
    """

    def __init__(self, nodes: list[int], partial: dict[int, int]) -> None:
        super().__init__(f"one-hot constraint violated for nodes {nodes}")
        self.nodes = nodes
        self.partial = partial


def as_bits(bits, num_vars: int | None = None) -> np.ndarray:
    """Coerce a 0/1 string or sequence into an ``int8`` array."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError("bit strings may contain only '0' and '1'")
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        arr = arr.astype(np.int8)
    else:
        arr = np.asarray(bits, dtype=np.int8).ravel()
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("bits must be 0 or 1")
    if num_vars is not None and arr.size != num_vars:
        raise ValueError(f"expected {num_vars} bits, got {arr.size}")
    return arr


@dataclass(frozen=True)
class QuboModel:
    """Binary quadratic objective ``offset + sum h_i x_i + sum_{i<j} c_ij x_i x_j``.

    ``var_map[v]`` is the ``(node, cluster)`` pair behind variable ``v`` and
    ``current`` holds each free node's cluster at build time; both are empty
    for models received over the wire.
    """

    linear: np.ndarray
    quadratic: dict[tuple[int, int], float]
    offset: float = 0.0
    var_map: tuple[tuple[int, int], ...] = ()
    current: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lin = np.asarray(self.linear, dtype=float).ravel()
        object.__setattr__(self, "linear", lin)
        for (i, j) in self.quadratic:
            if not (0 <= i < j < lin.size):
                raise ValueError(f"quadratic key {(i, j)} must satisfy 0 <= i < j < num_vars")
        if self.var_map and len(self.var_map) != lin.size:
            raise ValueError("var_map must have one entry per variable")

    @property
    def num_vars(self) -> int:
        return int(self.linear.size)

    @cached_property
    def coupling(self) -> np.ndarray:
        """Symmetric dense coupler matrix with zero diagonal."""
        J = np.zeros((self.num_vars, self.num_vars))
        for (i, j), c in self.quadratic.items():
            J[i, j] += c
            J[j, i] += c
        return J

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        return {key: v for v, key in enumerate(self.var_map)}

    def energy(self, bits) -> float:
        x = as_bits(bits, self.num_vars).astype(float)
        return float(self.offset + self.linear @ x + 0.5 * x @ self.coupling @ x)

    def energies(self, X: np.ndarray) -> np.ndarray:
        """Energies of each row of a 0/1 matrix."""
        X = np.asarray(X, dtype=float)
        return self.offset + X @ self.linear + 0.5 * np.einsum("ri,ri->r", X @ self.coupling, X)

    def max_abs_coefficient(self) -> float:
        vals = [abs(c) for c in self.quadratic.values()]
        if self.num_vars:
            vals.append(float(np.abs(self.linear).max()))
        return max(vals, default=0.0)

    def identity_bits(self) -> np.ndarray:
        """Bitstring keeping every free node in its current cluster."""
        bits = np.zeros(self.num_vars, dtype=np.int8)
        for v, (node, cluster) in enumerate(self.var_map):
            if self.current.get(node) == cluster:
                bits[v] = 1
        return bits

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "linear": [[i, float(c)] for i, c in enumerate(self.linear) if c != 0.0],
            "quadratic": [[i, j, float(c)] for (i, j), c in sorted(self.quadratic.items())],
            "offset": float(self.offset),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> QuboModel:
        n = int(data["num_vars"])
        if n < 0:
            raise ValueError("num_vars must be nonnegative")
        lin = np.zeros(n)
        for i, c in data.get("linear", []):
            lin[int(i)] += float(c)
        quad: dict[tuple[int, int], float] = {}
        for i, j, c in data.get("quadratic", []):
            i, j = int(i), int(j)
            if i == j:
                lin[i] += float(c)
                continue
            key = (i, j) if i < j else (j, i)
            quad[key] = quad.get(key, 0.0) + float(c)
        return cls(lin, quad, float(data.get("offset", 0.0)))

    @classmethod
    def from_json(cls, text: str) -> QuboModel:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LocalProblem:
    """Free nodes, their ordered candidate clusters and the penalty weight."""

    free_nodes: tuple[int, ...]
    candidates: Mapping[int, Sequence[int]]
    gamma: float

    def validate(self, p: Partition, max_nodes: int | None = None, max_clusters: int | None = None) -> None:
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if len(set(self.free_nodes)) != len(self.free_nodes):
            raise ValueError("free nodes must be distinct")
        if max_nodes is not None and len(self.free_nodes) > max_nodes:
            raise ValueError(f"{len(self.free_nodes)} free nodes exceed max_nodes={max_nodes}")
        for i in self.free_nodes:
            cands = self.candidates.get(i)
            if not cands:
                raise ValueError(f"node {i} has no candidate clusters")
            if p.assignment[i] not in cands:
                raise ValueError(f"candidates of node {i} omit its current cluster")
            if len(set(cands)) != len(cands):
                raise ValueError(f"candidates of node {i} repeat a cluster")
            if max_clusters is not None and len(cands) > max_clusters:
                raise ValueError(f"node {i} has more than max_clusters={max_clusters} candidates")
            for c in cands:
                if c not in p.clusters:
                    raise ValueError(f"candidate cluster {c} of node {i} does not exist")


def build_qubo(g: Graph, p: Partition, lp: LocalProblem, max_vars: int | None = None) -> QuboModel:
    """Assemble the penalized multi-cluster QUBO for one local subproblem.

    Raises:
        SizeExceeded: if the variable count exceeds ``max_vars``.
    """
    lp.validate(p)
    m = g.m
    if m <= 0:
        raise ValueError("graph has no edge weight")
    two_m = 2.0 * m
    deg = g.degrees
    loops = g.self_loops
    a = p.assignment
    gamma = float(lp.gamma)
    free = set(lp.free_nodes)

    var_map = [(i, l) for i in lp.free_nodes for l in lp.candidates[i]]
    L = len(var_map)
    if max_vars is not None and L > max_vars:
        raise SizeExceeded(f"QUBO has {L} variables, capacity is {max_vars}")

    clusters = sorted({l for _, l in var_map})
    # fixed part of each candidate cluster: degree sum and internal weight
    fixed_tot = {l: p.cluster_degree[l] for l in clusters}
    fixed_in = {l: p.cluster_internal[l] for l in clusters}
    links_fixed: dict[int, dict[int, float]] = {}
    for i in lp.free_nodes:
        li: dict[int, float] = {}
        own = a[i]
        for j, w in g.neighbors(i).items():
            cj = a[j]
            if j in free:
                if cj == own and own in fixed_in and j < i:
                    fixed_in[own] -= w  # free-free edge inside own cluster, once
                continue
            li[cj] = li.get(cj, 0.0) + w
        links_fixed[i] = li
        if own in fixed_tot:
            fixed_tot[own] -= float(deg[i])
            fixed_in[own] -= li.get(own, 0.0) + float(loops[i])

    linear = np.empty(L)
    for v, (i, l) in enumerate(var_map):
        k = float(deg[i])
        diag = k * k / two_m - 2.0 * float(loops[i])
        to_fixed = 2.0 * (k * fixed_tot[l] / two_m - links_fixed[i].get(l, 0.0))
        linear[v] = diag + to_fixed - gamma

    quad: dict[tuple[int, int], float] = {}
    by_cluster: dict[int, list[int]] = {}
    by_node: dict[int, list[int]] = {}
    for v, (i, l) in enumerate(var_map):
        by_cluster.setdefault(l, []).append(v)
        by_node.setdefault(i, []).append(v)
    for l, vs in by_cluster.items():
        for x in range(len(vs)):
            u = vs[x]
            i = var_map[u][0]
            ki = float(deg[i])
            nbrs = g.neighbors(i)
            for y in range(x + 1, len(vs)):
                w = vs[y]
                j = var_map[w][0]
                c = 2.0 * (ki * float(deg[j]) / two_m - nbrs.get(j, 0.0))
                if c != 0.0:
                    quad[(u, w)] = c
    if gamma:
        for vs in by_node.values():
            for x in range(len(vs)):
                for y in range(x + 1, len(vs)):
                    quad[(vs[x], vs[y])] = quad.get((vs[x], vs[y]), 0.0) + 2.0 * gamma

    offset = gamma * len(lp.free_nodes)
    for l in clusters:
        offset += fixed_tot[l] ** 2 / two_m - 2.0 * fixed_in[l]
    current = {i: a[i] for i in lp.free_nodes}
    return QuboModel(linear, quad, offset, tuple(var_map), current)


def energy(q: QuboModel, bits) -> float:
    """Objective value of ``bits`` including the constant offset."""
    return q.energy(bits)


def decode(q: QuboModel, bits) -> dict[int, int]:
    """Translate a solver bitstring into ``{node: new_cluster}`` moves.

    No-op moves are omitted.

    Raises:
        InfeasibleSolution: if any free node has zero or several set bits.
    """
    x = as_bits(bits, q.num_vars)
    chosen: dict[int, list[int]] = {i: [] for i in q.current}
    for v, (i, l) in enumerate(q.var_map):
        if x[v]:
            chosen[i].append(l)
    bad = [i for i, ls in chosen.items() if len(ls) != 1]
    moves = {i: ls[0] for i, ls in chosen.items() if len(ls) == 1 and ls[0] != q.current[i]}
    if bad:
        raise InfeasibleSolution(sorted(bad), moves)
    return moves
