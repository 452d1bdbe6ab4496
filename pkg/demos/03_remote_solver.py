"""
Talking to a remote annealer
============================

The remote backend posts the QUBO as JSON and checks the energy that comes
back.  ``StubServer`` speaks the same protocol in-process, which is enough
to exercise the client end to end.
"""

import numpy as np

from isinglouvain import Hyperparams, builtin_graph, ising_louvain, modularity
from isinglouvain.qubo import QuboModel
from isinglouvain.remote import ProtocolViolation, StubServer, encode_request, solve_remote
from isinglouvain.solvers import SolveRequest

q = QuboModel(np.array([1.0, -3.0]), {(0, 1): 5.0})
print("request body:", encode_request(SolveRequest(q, timeout=2.0, seed=1)))

with StubServer() as server:
    r = solve_remote(SolveRequest(q), server.url)
    print("reply:", r.bitstring, r.energy)

    # The whole algorithm can run against the endpoint.
    hp = Hyperparams(solver="remote", endpoint=server.url, max_nodes=6)
    g = builtin_graph("karate")
    p, stats = ising_louvain(g, hp)
    print(f"karate via remote: Q={modularity(g, p):.4f}, {server.requests} requests")

# %%
# A server whose reported energy disagrees with its bits is rejected.
with StubServer(energy_error=0.25) as liar:
    try:
        solve_remote(SolveRequest(q), liar.url)
    except ProtocolViolation as exc:
        print("rejected:", exc)
