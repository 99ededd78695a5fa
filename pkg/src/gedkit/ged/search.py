"""Best-first tree search over partial node mappings: exact A* and its beam variant.

A search state maps a prefix of g1's nodes (in a fixed processing order) to
distinct g2 nodes or to deletion. ``g`` is the cost of every edit that the
prefix already decides; the heuristic is the larger of two admissible lower
bounds on the rest:

* an assignment bound over the unprocessed g1 nodes and unused g2 nodes:
  matching ``u`` to ``v`` costs the relabel indicator, the exact cost of the
  edges between ``u`` and already-processed nodes under that choice, and half
  the difference of their remaining degrees (an edge between two remaining
  nodes is charged at most once per endpoint);
* the label-multiset node bound plus the remaining edge-count difference,
  which price disjoint parts of the edit path and so add up.
"""

from __future__ import annotations

import heapq
import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..graph import Graph
from .costs import (
    EXACT,
    UPPER_BOUND,
    UNIT_COSTS,
    BudgetExceededError,
    CostModel,
    GedResult,
    edit_path_from_mapping,
    invert_mapping,
    mapping_cost,
    orientation_key,
)

DEFAULT_BEAM_WIDTH = 100
DEFAULT_BUDGET = 2_000_000
_EPS = 1e-9


class _Problem:
    def __init__(self, g1: Graph, g2: Graph, cm: CostModel):
        self.g1, self.g2, self.cm = g1, g2, cm
        n1, n2 = g1.num_nodes, g2.num_nodes
        self.n1, self.n2 = n1, n2
        # high-degree nodes first: their edges get decided early, which tightens g
        self.order = sorted(range(n1), key=lambda u: (-int(g1.degrees[u]), u))
        codes = {}
        self.lab1 = [codes.setdefault(lab, len(codes)) for lab in g1.labels]
        self.lab2 = [codes.setdefault(lab, len(codes)) for lab in g2.labels]
        self.n_codes = len(codes)
        self.adj2 = [[bool(x) for x in row] for row in g2.adjacency]
        # prev_adj[d][p]: is order[d] adjacent to order[p] for p < d
        a1 = g1.adjacency
        self.prev_adj = [[bool(a1[self.order[d], self.order[p]]) for p in range(d)] for d in range(n1)]
        self.e1, self.e2 = g1.num_edges, g2.num_edges
        inner1 = [0] * (n1 + 1)
        for d in range(n1):
            inner1[d + 1] = inner1[d] + sum(self.prev_adj[d])
        self.rem_edges1 = [self.e1 - inner1[d] for d in range(n1 + 1)]

        order = np.array(self.order, dtype=np.intp)
        self.deg1 = g1.degrees.astype(float)[order]
        self.deg2 = g2.degrees.astype(float)
        self.lab1_ordered = np.array([self.lab1[u] for u in self.order], dtype=int)
        self.lab2_arr = np.array(self.lab2, dtype=int)
        self.relabel = cm.node_relabel * (self.lab1_ordered[:, None] != self.lab2_arr[None, :])
        # g1 adjacency in processing order; g2 adjacency with a trailing zero
        # column so that index -1 (a deleted node's image) reads as "no edge"
        a1 = g1.adjacency.astype(float)[np.ix_(order, order)] if n1 else np.zeros((0, 0))
        self.a1 = a1
        self.a2 = np.zeros((n2, n2 + 1))
        self.a2[:, :n2] = g2.adjacency
        self.label_count1 = np.zeros((n1 + 1, self.n_codes), dtype=int)
        for d in range(n1 - 1, -1, -1):
            self.label_count1[d] = self.label_count1[d + 1]
            self.label_count1[d, self.lab1_ordered[d]] += 1
        self.label_count2 = np.bincount(self.lab2_arr, minlength=self.n_codes) if n2 else np.zeros(self.n_codes, int)

    def _assignment_bound(self, depth: int, free2: list, images: tuple) -> float:
        """Assignment lower bound over remaining nodes.

        Edges from a remaining node to processed nodes are priced exactly for
        each candidate image; edges among remaining nodes get half the
        degree difference.
        """
        cm = self.cm
        to_proc1 = self.a1[depth:, :depth]
        to_proc2 = self.a2[np.ix_(free2, images)] if depth else np.zeros((len(free2), 0))
        cross = (cm.edge_delete * (to_proc1 @ (1.0 - to_proc2).T)
                 + cm.edge_insert * ((1.0 - to_proc1) @ to_proc2.T))
        proc1 = to_proc1.sum(axis=1)
        proc2 = to_proc2.sum(axis=1)
        rest1 = self.deg1[depth:] - proc1
        rest2 = self.deg2[free2] - proc2
        diff = rest1[:, None] - rest2[None, :]
        sub = (self.relabel[depth:][:, free2] + cross
               + 0.5 * (cm.edge_delete * np.maximum(diff, 0) + cm.edge_insert * np.maximum(-diff, 0)))
        dele = cm.node_delete + cm.edge_delete * (proc1 + 0.5 * rest1)
        ins = cm.node_insert + cm.edge_insert * (proc2 + 0.5 * rest2)
        reduced = np.minimum(0.0, sub - dele[:, None] - ins[None, :])
        rows, cols = linear_sum_assignment(reduced)
        return dele.sum() + ins.sum() + reduced[rows, cols].sum()

    def completion(self, used: int, inner2: int) -> float:
        """Exact remaining cost once every g1 node is decided."""
        free = self.n2 - bin(used).count("1")
        return self.cm.node_insert * free + self.cm.edge_insert * (self.e2 - inner2)

    def heuristic(self, depth: int, used: int, used_labels: np.ndarray, inner2: int, images: tuple) -> float:
        cm = self.cm
        free2 = [v for v in range(self.n2) if not used >> v & 1]
        r1 = self.rem_edges1[depth]
        r2 = self.e2 - inner2
        a, b = self.n1 - depth, len(free2)
        if a == 0:
            return self.completion(used, inner2)
        if b == 0:
            # every remaining g1 node must go, together with its remaining edges
            return cm.node_delete * a + cm.edge_delete * r1 + cm.edge_insert * r2
        common = int(np.minimum(self.label_count1[depth], self.label_count2 - used_labels).sum())
        k = min(a, b)
        node_lb = min(
            (a - s) * cm.node_delete + (b - s) * cm.node_insert + max(0, s - common) * cm.node_relabel
            for s in {0, min(common, k), k}
        )
        edge_lb = cm.edge_delete * max(0, r1 - r2) + cm.edge_insert * max(0, r2 - r1)
        lsap = self._assignment_bound(depth, free2, images)
        return max(node_lb + edge_lb, lsap)


def _tree_search(g1: Graph, g2: Graph, cm: CostModel, width=None, budget=DEFAULT_BUDGET,
                 upper_bound=None):
    p = _Problem(g1, g2, cm)
    n1, n2 = p.n1, p.n2
    counter = 0
    expansions = 0
    bound = float("inf") if upper_bound is None else upper_bound + _EPS
    no_labels = np.zeros(p.n_codes, dtype=int)

    if n1 == 0:
        return p.completion(0, 0), (), 0

    h0 = p.heuristic(0, 0, no_labels, 0, ())
    # entry: (f, -depth, counter, g, depth, images, used_mask, used_label_counts, inner2)
    heap = [(h0, 0, counter, 0.0, 0, (), 0, no_labels, 0)]
    while heap:
        f, _, _, g, depth, images, used, used_labels, inner2 = heapq.heappop(heap)
        if depth == n1:
            mapping = [-1] * n1
            for d, v in enumerate(images):
                mapping[p.order[d]] = v
            return g, tuple(mapping), expansions
        expansions += 1
        if budget is not None and expansions > budget:
            raise BudgetExceededError(budget)
        u = p.order[depth]
        prev = p.prev_adj[depth]
        for v in list(range(n2)) + [-1]:
            if v >= 0 and used >> v & 1:
                continue
            dg = 0.0
            added_inner = 0
            if v < 0:
                dg += cm.node_delete
                dg += cm.edge_delete * sum(prev)
            else:
                if p.lab1[u] != p.lab2[v]:
                    dg += cm.node_relabel
                row2 = p.adj2[v]
                for q in range(depth):
                    w_img = images[q]
                    e2 = w_img >= 0 and row2[w_img]
                    if e2:
                        added_inner += 1
                    if prev[q]:
                        if not e2:
                            dg += cm.edge_delete
                    elif e2:
                        dg += cm.edge_insert
            cg = g + dg
            cdepth = depth + 1
            cused = used | (1 << v) if v >= 0 else used
            cinner = inner2 + added_inner
            if v >= 0:
                clabels = used_labels.copy()
                clabels[p.lab2[v]] += 1
            else:
                clabels = used_labels
            if cdepth == n1:
                cg += p.completion(cused, cinner)
                h = 0.0
            else:
                h = p.heuristic(cdepth, cused, clabels, cinner, images + (v,))
            cf = cg + h
            if cf > bound:
                continue
            counter += 1
            heapq.heappush(heap, (cf, -cdepth, counter, cg, cdepth, images + (v,), cused, clabels, cinner))
        if width is not None and len(heap) > width:
            heap = heapq.nsmallest(width, heap)
    raise RuntimeError("search exhausted without reaching a complete mapping")


def ged_astar(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS, budget: int | None = DEFAULT_BUDGET,
              upper_bound: float | None = None) -> GedResult:
    """Exact GED. Raises BudgetExceededError after ``budget`` state expansions."""
    start = time.perf_counter()
    if upper_bound is None:
        from .bipartite import bipartite_mapping

        upper_bound = mapping_cost(g1, g2, bipartite_mapping(g1, g2, cm), cm)
    dist, f, expansions = _tree_search(g1, g2, cm, None, budget, upper_bound)
    return GedResult(
        distance=float(dist), kind=EXACT, algorithm="astar", mapping=f,
        edit_path=edit_path_from_mapping(g1, g2, f), elapsed=time.perf_counter() - start,
        details={"expansions": expansions},
    )


def ged_beam(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS, width: int = DEFAULT_BEAM_WIDTH) -> GedResult:
    """Beam search: A* whose open list keeps only the ``width`` most promising states."""
    if width < 1:
        raise ValueError("beam width must be >= 1")
    start = time.perf_counter()
    swap = orientation_key(g2) < orientation_key(g1)
    a, b = (g2, g1) if swap else (g1, g2)
    _, f, expansions = _tree_search(a, b, cm, width, None)
    if swap:
        f = invert_mapping(f, g1.num_nodes)
    dist = mapping_cost(g1, g2, f, cm)
    return GedResult(
        distance=float(dist), kind=UPPER_BOUND, algorithm="beam", mapping=f,
        edit_path=edit_path_from_mapping(g1, g2, f), elapsed=time.perf_counter() - start,
        details={"width": width, "expansions": expansions},
    )
