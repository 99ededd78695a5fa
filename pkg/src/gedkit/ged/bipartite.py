"""Bipartite GED approximations (Hungarian and Volgenant-Jonker solvers).

The ``(n1 + n2)``-square cost matrix has a substitution block, diagonal
deletion and insertion blocks, and a zero block. The returned distance is
always the true cost of the edit path induced by the optimal assignment,
never the assignment objective itself, so it is an upper bound on GED.
"""

from __future__ import annotations

import time

import numpy as np

from ..graph import Graph
from .assignment import hungarian, lapjv
from .costs import (
    UPPER_BOUND,
    UNIT_COSTS,
    CostModel,
    GedResult,
    edit_path_from_mapping,
    invert_mapping,
    mapping_cost,
    orientation_key,
)


def bipartite_cost_matrix(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS) -> np.ndarray:
    n1, n2 = g1.num_nodes, g2.num_nodes
    d1 = g1.degrees.astype(float)
    d2 = g2.degrees.astype(float)
    diff = d1[:, None] - d2[None, :]
    relabel = np.array([[a != b for b in g2.labels] for a in g1.labels], dtype=float).reshape(n1, n2)
    sub = cm.node_relabel * relabel + 0.5 * (cm.edge_delete * np.maximum(diff, 0)
                                             + cm.edge_insert * np.maximum(-diff, 0))
    dele = cm.node_delete + 0.5 * cm.edge_delete * d1
    ins = cm.node_insert + 0.5 * cm.edge_insert * d2
    forbidden = 1.0 + sub.sum() + dele.sum() + ins.sum()
    c = np.zeros((n1 + n2, n1 + n2))
    c[:n1, :n2] = sub
    c[:n1, n2:] = forbidden
    c[n1:, :n2] = forbidden
    c[np.arange(n1), n2 + np.arange(n1)] = dele
    c[n1 + np.arange(n2), np.arange(n2)] = ins
    return c


def mapping_from_assignment(col_of_row, n1: int, n2: int) -> tuple:
    return tuple(int(j) if j < n2 else -1 for j in col_of_row[:n1])


def bipartite_mapping(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS, solver=lapjv) -> tuple:
    n1, n2 = g1.num_nodes, g2.num_nodes
    c = bipartite_cost_matrix(g1, g2, cm)
    # Among equally cheap assignments prefer u -> u. The nudge sums to far less
    # than any cost gap, and it makes identical graphs come out at distance 0.
    positive = c[c > 0]
    nudge = 1e-7 * (positive.min() if positive.size else 1.0) / max(n1 + n2, 1)
    c[:n1, :n2] += nudge * (np.arange(n1)[:, None] != np.arange(n2)[None, :])
    return mapping_from_assignment(solver(c), g1.num_nodes, g2.num_nodes)


def _bipartite_ged(g1, g2, cm, solver, name) -> GedResult:
    start = time.perf_counter()
    swap = orientation_key(g2) < orientation_key(g1)
    a, b = (g2, g1) if swap else (g1, g2)
    f = bipartite_mapping(a, b, cm, solver)
    if swap:
        f = invert_mapping(f, g1.num_nodes)
    return GedResult(
        distance=float(mapping_cost(g1, g2, f, cm)), kind=UPPER_BOUND, algorithm=name, mapping=f,
        edit_path=edit_path_from_mapping(g1, g2, f), elapsed=time.perf_counter() - start,
    )


def ged_hungarian(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS) -> GedResult:
    return _bipartite_ged(g1, g2, cm, hungarian, "hungarian")


def ged_vj(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS) -> GedResult:
    return _bipartite_ged(g1, g2, cm, lapjv, "vj")
