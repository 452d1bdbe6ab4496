"""Modularity clustering where Louvain's greedy node moves are replaced by
small QUBO subproblems over several nodes at once."""

from .graph import Graph, aggregate, builtin_graph, load_dataset, load_edge_list
from .ising_louvain import Hyperparams, RunStats, ising_louvain
from .louvain import louvain
from .modularity import apply_moves, brute_force_best, mod_gain, modularity
from .partition import NEW_CLUSTER, Partition
from .qubo import LocalProblem, QuboModel, build_qubo, decode
from .solvers import SolveRequest, SolveResult, solve

__all__ = [
    "Graph",
    "Partition",
    "NEW_CLUSTER",
    "aggregate",
    "builtin_graph",
    "load_dataset",
    "load_edge_list",
    "modularity",
    "mod_gain",
    "apply_moves",
    "brute_force_best",
    "QuboModel",
    "LocalProblem",
    "build_qubo",
    "decode",
    "SolveRequest",
    "SolveResult",
    "solve",
    "louvain",
    "ising_louvain",
    "Hyperparams",
    "RunStats",
]
