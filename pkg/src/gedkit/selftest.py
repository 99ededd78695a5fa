"""Built-in consistency checks: gradients against finite differences, solvers against oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ged import assignment_cost, ged_astar, ged_bruteforce, ged_hungarian, ged_min_ensemble, ged_vj, hungarian, lapjv
from .ged.search import ged_beam
from .graph import LabelEncoder, generate_graph, perturb_graph
from .metrics import kendall_tau, spearman_rho
from .model import POOLING_VARIANTS, SimGNN, SimGNNConfig
from .numerics import check_gradients


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def random_pair(rng, max_nodes: int = 6, alphabet=("C", "N", "O")):
    """A random pair of small graphs, half of them related by a few edits."""
    labels = list(alphabet) if rng.random() < 0.5 else None
    n1 = int(rng.integers(1, max_nodes + 1))
    g1 = generate_graph(n1, float(rng.uniform(0.1, 0.7)), labels, int(rng.integers(2**31)))
    if rng.random() < 0.5:
        g2, _ = perturb_graph(g1, int(rng.integers(1, 4)), int(rng.integers(2**31)), alphabet=labels,
                              connected=False, max_nodes=max_nodes)
    else:
        n2 = int(rng.integers(1, max_nodes + 1))
        g2 = generate_graph(n2, float(rng.uniform(0.1, 0.7)), labels, int(rng.integers(2**31)))
    return g1, g2


def check_model_gradients(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    enc = LabelEncoder(["C", "N", "O"])
    g1 = generate_graph(4, 0.5, enc.labels, int(rng.integers(2**31)))
    g2 = generate_graph(5, 0.5, enc.labels, int(rng.integers(2**31)))
    failures = []
    for pooling in POOLING_VARIANTS:
        for s2 in (True, False):
            m = SimGNN(SimGNNConfig((8, 8, 4), 4, 4, (16, 8, 4, 1), pooling, s2, seed), enc)
            bad = check_gradients(lambda: m.loss([(g1, g2)], [0.5]), m.params)
            if bad:
                failures.append(f"{pooling}/strategy2={s2}: {len(bad)} entries, e.g. {bad[0]}")
    return CheckResult("model gradients vs finite differences", not failures, "; ".join(failures))


def check_exact_ged(n_pairs: int, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    exact_bad, bound_bad = [], []
    for _ in range(n_pairs):
        g1, g2 = random_pair(rng)
        ref = ged_bruteforce(g1, g2).distance
        got = ged_astar(g1, g2).distance
        if got != ref:
            exact_bad.append((g1, g2, got, ref))
        members = [ged_beam(g1, g2, width=5), ged_hungarian(g1, g2), ged_vj(g1, g2)]
        ens = ged_min_ensemble(g1, g2)
        if any(r.distance < ref for r in members + [ens]) or any(ens.distance > r.distance for r in members):
            bound_bad.append((g1, g2))
    return [
        CheckResult(f"A* equals brute force ({n_pairs} pairs)", not exact_bad,
                    f"{len(exact_bad)} mismatches" if exact_bad else ""),
        CheckResult(f"approximations bound exact GED from above ({n_pairs} pairs)", not bound_bad,
                    f"{len(bound_bad)} violations" if bound_bad else ""),
    ]


def check_assignment(n_cases: int, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for k in range(n_cases):
        n = int(rng.integers(1, 10))
        cost = rng.integers(0, 4, size=(n, n)).astype(float) if k % 2 else rng.random((n, n))
        r, c = linear_sum_assignment(cost)
        ref = cost[r, c].sum()
        for solver in (hungarian, lapjv):
            if abs(assignment_cost(cost, solver(cost)) - ref) > 1e-9:
                bad += 1
    return CheckResult(f"assignment solvers match scipy ({n_cases} matrices)", bad == 0,
                       f"{bad} mismatches" if bad else "")


def check_metric_oracles() -> CheckResult:
    rho = spearman_rho([1, 2, 3, 4], [1, 2, 4, 3])
    tau = kendall_tau([1, 2, 3], [1, 3, 2])
    ok = abs(rho - 0.8) < 1e-12 and abs(tau - 1 / 3) < 1e-12
    return CheckResult("rank correlation hand values", ok, f"rho={rho} tau={tau}")


def run_selftest(quick: bool = False, seed: int = 0) -> list[CheckResult]:
    n = 40 if quick else 200
    return [check_model_gradients(seed), *check_exact_ged(n, seed), check_assignment(n, seed),
            check_metric_oracles()]
