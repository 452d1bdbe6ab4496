import random

import numpy as np
import pytest

from isinglouvain.graph import FIGURE2_PARTITION, Graph, aggregate, builtin_graph, load_dataset
from isinglouvain.louvain import flatten, local_moving, louvain
from isinglouvain.modularity import brute_force_best, modularity
from isinglouvain.partition import Partition
from tests.conftest import random_graph, random_partition


def test_two_triangles():
    g = builtin_graph("two_triangles")
    p, _ = louvain(g, seed=0)
    assert p.labels() == [0, 0, 0, 1, 1, 1]
    assert modularity(g, p) == pytest.approx(brute_force_best(g)[1], abs=1e-12)


def test_disconnected_triangles():
    g = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    for seed in range(5):
        p, _ = louvain(g, seed=seed)
        assert p.labels() == [0, 0, 0, 1, 1, 1]
        assert modularity(g, p) == pytest.approx(0.5)


def test_karate_best_of_20():
    g = load_dataset("karate")
    best = max(modularity(g, louvain(g, seed=s)[0]) for s in range(20))
    assert best == pytest.approx(0.4198, abs=1e-4)


def test_deterministic():
    g = load_dataset("lesmiserables")
    a, ta = louvain(g, seed=3)
    b, tb = louvain(g, seed=3)
    assert a.assignment == b.assignment
    assert ta == tb


def test_trace_monotone_and_final_q():
    rng = random.Random(1)
    for seed in range(30):
        g = random_graph(rng, 5, 60, density=rng.uniform(0.03, 0.3))
        p, trace = louvain(g, seed=seed)
        qs = [q for _, _, q in trace]
        assert all(b >= a - 1e-12 for a, b in zip(qs, qs[1:]))
        assert trace[-1][2] == pytest.approx(modularity(g, p), abs=1e-10)
        # each level starts at the previous level's final value
        for (l0, _, q0), (l1, k1, q1) in zip(trace, trace[1:]):
            if l1 != l0:
                assert k1 == 0
                assert q1 == pytest.approx(q0, abs=1e-12)


def test_local_moving_fixed_point():
    g = builtin_graph("two_triangles")
    p = Partition(g, [0, 0, 0, 1, 1, 1])
    assert not local_moving(p, np.random.default_rng(0))
    assert p.assignment == [0, 0, 0, 1, 1, 1]


def test_figure2_stalls_greedy():
    g = builtin_graph("figure2_case")
    p = Partition(g, FIGURE2_PARTITION)
    assert not local_moving(p, np.random.default_rng(0))


def test_flatten_consistency():
    rng = random.Random(5)
    for _ in range(30):
        g = random_graph(rng, 6, 30)
        p1 = random_partition(rng, g)
        g1, m1 = aggregate(g, p1)
        p2 = random_partition(rng, g1)
        g2, m2 = aggregate(g1, p2)
        top = random_partition(rng, g2)
        flat = flatten(g, m2[m1], top)
        assert modularity(g, flat) == pytest.approx(modularity(g2, top), abs=1e-10)


def test_no_edges_rejected():
    with pytest.raises(ValueError):
        louvain(Graph(3, []))
