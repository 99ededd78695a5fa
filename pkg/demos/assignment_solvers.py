"""The two assignment solvers behind the bipartite approximations, checked against scipy.

Run: python demos/assignment_solvers.py
"""

import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from gedkit.ged import assignment_cost, hungarian, lapjv

rng = np.random.default_rng(0)
for n in (5, 20, 60):
    cost = rng.random((n, n))
    r, c = linear_sum_assignment(cost)
    print(f"n={n:<3} scipy {cost[r, c].sum():.6f}", end="")
    for name, solver in (("hungarian", hungarian), ("jonker-volgenant", lapjv)):
        start = time.perf_counter()
        total = assignment_cost(cost, solver(cost))
        print(f" | {name} {total:.6f} in {(time.perf_counter() - start) * 1e3:.1f} ms", end="")
    print()
