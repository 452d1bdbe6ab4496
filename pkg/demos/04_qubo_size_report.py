"""
How big are the subproblems?
============================

Every solver call records its variable count.  The quartiles and a text
histogram summarize the distribution over one run.
"""

from isinglouvain import Hyperparams, ising_louvain
from isinglouvain.graph import load_dataset
from isinglouvain.reports import box_summary, histogram

g = load_dataset("lesmiserables")
_, stats = ising_louvain(g, Hyperparams(random_seed=0))
print(f"{stats.solver_calls} solver calls, {stats.greedy_shortcuts} greedy shortcuts, "
      f"{stats.single_candidate_eliminations} single-candidate nodes dropped")

s = box_summary(stats.qubo_sizes)
print(f"Q1={s['q1']:g} median={s['median']:g} Q3={s['q3']:g}  "
      f"whiskers [{s['whisker_low']:g}, {s['whisker_high']:g}], {s['outliers']} outliers")
print(histogram(stats.qubo_sizes, bins=8))

# %%
# Smaller free sets shrink the problems and raise the call count.
for max_nodes in (5, 10, 30):
    _, st = ising_louvain(g, Hyperparams(random_seed=0, max_nodes=max_nodes))
    print(f"max_nodes={max_nodes:2d}: calls={st.solver_calls:4d}  mean size={st.avg_qubo_size:6.1f}")
