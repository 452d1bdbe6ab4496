import random

import numpy as np
import pytest
from hypothesis import strategies as st

from isinglouvain.graph import Graph
from isinglouvain.partition import Partition


def random_graph(rng: random.Random, n_lo=2, n_hi=12, density=None, weighted=True, loops=True) -> Graph:
    """Random graph with at least one edge."""
    while True:
        n = rng.randint(n_lo, n_hi)
        pe = density if density is not None else rng.uniform(0.15, 0.7)
        edges = []
        for u in range(n):
            for v in range(u if loops else u + 1, n):
                if u == v and rng.random() > 0.15:
                    continue
                if rng.random() < pe:
                    w = rng.choice([0.5, 1.0, 1.0, 2.0, 3.0]) if weighted else 1.0
                    edges.append((u, v, w))
        if edges:
            return Graph(n, edges)


def random_partition(rng: random.Random, g: Graph, k=None) -> Partition:
    k = k or rng.randint(1, g.n)
    return Partition(g, [rng.randrange(k) for _ in range(g.n)])


@st.composite
def graphs(draw, max_nodes=12, loops=True):
    n = draw(st.integers(2, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u if loops else u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=3 * n))
    weights = draw(st.lists(st.sampled_from([0.5, 1.0, 2.0, 3.0]), min_size=len(chosen), max_size=len(chosen)))
    return Graph(n, [(u, v, w) for (u, v), w in zip(chosen, weights)])


@st.composite
def graph_and_partition(draw, max_nodes=12):
    g = draw(graphs(max_nodes=max_nodes))
    k = draw(st.integers(1, g.n))
    assignment = draw(st.lists(st.integers(0, k - 1), min_size=g.n, max_size=g.n))
    return g, Partition(g, assignment)


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def nprng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.RESULTS:
            terminalreporter.write_line(line)


def algorithm_subproblem(rng: random.Random, max_vars: int = 16):
    """A local subproblem built by the algorithm's own selection routines.

    Returns ``(graph, partition, LocalProblem)`` with at least two free nodes
    and at most ``max_vars`` variables; gamma is the maximum degree.
    """
    from isinglouvain.ising_louvain import Hyperparams, select_clusters, select_nodes
    from isinglouvain.qubo import LocalProblem

    while True:
        g = random_graph(rng, 4, 30, density=rng.uniform(0.05, 0.6), loops=False)
        p = random_partition(rng, g)
        hp = Hyperparams(max_nodes=rng.randint(2, 8), max_clusters=rng.randint(2, 4), bfs_depth=rng.randint(1, 3))
        nodes = select_nodes(g, p, rng.randrange(g.n), hp)
        cands, reduced, _ = select_clusters(g, p, nodes, hp)
        if len(reduced) < 2 or sum(len(cands[i]) for i in reduced) > max_vars:
            continue
        return g, p, LocalProblem(tuple(reduced), cands, float(g.degrees.max()))


def random_problem(rng, n_hi=40, max_free=6, max_clusters=4):
    """Random graph, partition and free set with random candidate lists."""
    from isinglouvain.qubo import LocalProblem

    g = random_graph(rng, 3, n_hi, density=rng.uniform(0.05, 0.5))
    p = random_partition(rng, g)
    free = rng.sample(range(g.n), rng.randint(1, min(max_free, g.n)))
    clusters = sorted(p.clusters)
    cands = {}
    for i in free:
        others = [c for c in clusters if c != p[i]]
        k = rng.randint(0, min(max_clusters - 1, len(others)))
        cands[i] = [p[i]] + rng.sample(others, k)
    gamma = rng.choice([0.0, float(g.degrees.max()), rng.uniform(0, 5)])
    return g, p, LocalProblem(tuple(free), cands, gamma)
