"""
Why a perfect matching beats greedy merging
===========================================

At each level every cluster is matched to exactly one partner, itself
included. Staying alone costs SM; cycles of the optimal permutation are
merged. Greedy agglomeration takes the cheapest edge first and can block
better pairs.
"""

import numpy as np

from ohc.engine import greedy_pairing, level_costs
from ohc.matching import BipartiteCostView, extract_merge_groups, solve_min_cost_perfect_matching
from ohc.proximity import ProximityGraph

# a chain a - b - c - d; the middle edge is the cheapest
rows, cols = np.array([0, 1, 2]), np.array([1, 2, 3])
values = np.array([0.15, 0.10, 0.15])
z = np.zeros(3, dtype=int)
graph = ProximityGraph(4, 0.4, rows, cols, values, z, z, np.zeros(3))
print(graph.to_dense())

greedy = greedy_pairing(graph)
print("greedy :", extract_merge_groups(greedy), "cost", level_costs(graph, greedy))

best = solve_min_cost_perfect_matching(graph.cost_view())
print("optimal:", best.merge_groups, "cost", best.total_cost)

# cycles longer than two merge in one step
m = np.full((3, 3), np.inf)
np.fill_diagonal(m, 0.4)
m[0, 1] = m[1, 2] = m[2, 0] = 0.05
m[1, 0] = m[2, 1] = m[0, 2] = 0.3
res = solve_min_cost_perfect_matching(BipartiteCostView.from_dense(m))
print("3-cycle:", res.permutation, "->", res.merge_groups)
