"""
Modularity, move gains and the local QUBO
=========================================

Score a partition, price a move, then pose the same move as a small
binary optimization problem and check that both views agree.
"""

import itertools

import numpy as np

from isinglouvain import Partition, build_qubo, builtin_graph, decode, mod_gain, modularity
from isinglouvain.qubo import LocalProblem
from isinglouvain.solvers import SolveRequest, solve_exhaustive

# Two triangles joined by one bridge edge.
g = builtin_graph("two_triangles")
print(f"n={g.n}  m={g.m:g}  degrees={g.degrees.tolist()}")

print("each triangle:", round(modularity(g, [0, 0, 0, 1, 1, 1]), 6))
print("one cluster:  ", modularity(g, [0] * g.n))

# Start from singletons and ask what moving node 1 next to node 0 is worth.
p = Partition.singleton(g)
print("gain of 1 -> cluster(0):", round(mod_gain(g, p, {1: p[0]}), 6))

# %%
# Free nodes 0 and 1, each allowed to sit in either of their two clusters.
# That gives four binary variables and a one-hot penalty per node.
lp = LocalProblem((0, 1), {0: [0, 1], 1: [1, 0]}, gamma=float(g.degrees.max()))
q = build_qubo(g, p, lp)
print(f"{q.num_vars} variables, {len(q.quadratic)} couplers")

best = solve_exhaustive(SolveRequest(q))
print("minimizer", best.bitstring, "->", decode(q, best.bits))

# %%
# Energy differences are -2m times modularity gains, for every feasible
# assignment, not only for the minimizer.
e0 = q.energy(q.identity_bits())
for c0, c1 in itertools.product([0, 1], repeat=2):
    bits = np.zeros(q.num_vars, dtype=int)
    bits[q.index[(0, c0)]] = bits[q.index[(1, c1)]] = 1
    moves = {0: c0, 1: c1}
    print(f"0->{c0} 1->{c1}:  dE={q.energy(bits) - e0:+.4f}  -2m*gain={-2 * g.m * mod_gain(g, p, moves):+.4f}")
