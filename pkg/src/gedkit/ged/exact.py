"""Exhaustive GED for tiny graphs, kept deliberately naive as a test oracle."""

from __future__ import annotations

import time
from itertools import combinations, permutations

from ..graph import Graph
from .costs import EXACT, UNIT_COSTS, CostModel, GedResult, SizeLimitError, edit_path_from_mapping

BRUTEFORCE_MAX_NODES = 7


def ged_bruteforce(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS,
                   max_nodes: int = BRUTEFORCE_MAX_NODES) -> GedResult:
    """Enumerate every injective partial mapping of g1's nodes into g2's and keep the cheapest."""
    n1, n2 = g1.num_nodes, g2.num_nodes
    if max(n1, n2) > max_nodes:
        raise SizeLimitError(f"brute force is limited to {max_nodes} nodes, got {max(n1, n2)}")
    start = time.perf_counter()
    e2 = {(a, b) for a, b in g2.edges} | {(b, a) for a, b in g2.edges}
    best, best_f = float("inf"), None
    for k in range(min(n1, n2) + 1):
        for src in combinations(range(n1), k):
            for dst in permutations(range(n2), k):
                f = [-1] * n1
                for u, v in zip(src, dst):
                    f[u] = v
                cost = cm.node_delete * (n1 - k) + cm.node_insert * (n2 - k)
                for u, v in zip(src, dst):
                    if g1.labels[u] != g2.labels[v]:
                        cost += cm.node_relabel
                kept = 0
                for u, w in g1.edges:
                    if f[u] >= 0 and f[w] >= 0 and (f[u], f[w]) in e2:
                        kept += 1
                cost += cm.edge_delete * (g1.num_edges - kept) + cm.edge_insert * (g2.num_edges - kept)
                if cost < best:
                    best, best_f = cost, tuple(f)
    return GedResult(
        distance=float(best), kind=EXACT, algorithm="bruteforce", mapping=best_f,
        edit_path=edit_path_from_mapping(g1, g2, best_f), elapsed=time.perf_counter() - start,
    )
