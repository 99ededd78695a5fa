"""Exact and approximate edit distances on a small molecule-like pair.

Run: python demos/ged_basics.py
"""

from gedkit.dataset import ged_to_similarity, normalized_ged
from gedkit.ged import ALGORITHMS, compute_ged
from gedkit.graph import Graph

ring = Graph.from_edges(["C", "C", "O", "N", "C"], [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)], "left")
chain = Graph.from_edges(["C", "C", "S", "N", "C"], [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], "right")

print(f"{ring}\n{chain}\n")
for algo in ALGORITHMS:
    r = compute_ged(algo, ring, chain)
    print(f"{algo:>10}: {r.distance:g} ({r.kind}, {r.elapsed * 1e3:.2f} ms)")

exact = compute_ged("astar", ring, chain)
print("\ncheapest edit path:")
for op in exact.edit_path:
    print("  ", op.to_json())

nged = normalized_ged(exact.distance, ring.num_nodes, chain.num_nodes)
print(f"\nnormalized distance {nged:.3f}, similarity {ged_to_similarity(exact.distance, 5, 5):.4f}")
