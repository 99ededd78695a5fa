"""Exact and approximate graph edit distance."""

from __future__ import annotations

import time

from ..graph import Graph
from .assignment import assignment_cost, hungarian, lapjv
from .bipartite import bipartite_cost_matrix, ged_hungarian, ged_vj
from .costs import (
    EXACT,
    UPPER_BOUND,
    UNIT_COSTS,
    BudgetExceededError,
    CostModel,
    EditOp,
    GedResult,
    SizeLimitError,
    apply_edit_path,
    are_isomorphic,
    edit_path_from_mapping,
    mapping_cost,
    path_cost,
)
from .exact import ged_bruteforce
from .search import DEFAULT_BEAM_WIDTH, DEFAULT_BUDGET, ged_astar, ged_beam

ALGORITHMS = ("bruteforce", "astar", "beam", "hungarian", "vj", "ensemble")


def ged_min_ensemble(g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS,
                     width: int = DEFAULT_BEAM_WIDTH) -> GedResult:
    """Smallest of the beam, Hungarian and VJ upper bounds (first listed wins ties)."""
    start = time.perf_counter()
    members = [ged_beam(g1, g2, cm, width), ged_hungarian(g1, g2, cm), ged_vj(g1, g2, cm)]
    best = min(members, key=lambda r: r.distance)
    return GedResult(
        distance=best.distance, kind=UPPER_BOUND, algorithm="ensemble", mapping=best.mapping,
        edit_path=best.edit_path, elapsed=time.perf_counter() - start,
        details={"members": {r.algorithm: r.distance for r in members}, "chosen": best.algorithm},
    )


def compute_ged(algo: str, g1: Graph, g2: Graph, cm: CostModel = UNIT_COSTS, *,
                width: int = DEFAULT_BEAM_WIDTH, budget: int | None = DEFAULT_BUDGET) -> GedResult:
    if algo == "bruteforce":
        return ged_bruteforce(g1, g2, cm)
    if algo == "astar":
        return ged_astar(g1, g2, cm, budget=budget)
    if algo == "beam":
        return ged_beam(g1, g2, cm, width)
    if algo == "hungarian":
        return ged_hungarian(g1, g2, cm)
    if algo == "vj":
        return ged_vj(g1, g2, cm)
    if algo == "ensemble":
        return ged_min_ensemble(g1, g2, cm, width)
    raise ValueError(f"unknown GED algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
