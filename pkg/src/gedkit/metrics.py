"""Ranking metrics and the query-protocol evaluation of similarity methods."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .dataset import Dataset, ged_to_similarity
from .ged import compute_ged


def _pair_arrays(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} predictions, {t.size} targets")
    return p, t


def mse(pred, truth) -> float:
    p, t = _pair_arrays(pred, truth)
    if p.size == 0:
        raise ValueError("mse of empty lists")
    return float(np.mean((p - t) ** 2))


def spearman_rho(pred, truth) -> float:
    """Pearson correlation of average ranks; NaN when either side is constant."""
    p, t = _pair_arrays(pred, truth)
    if p.size < 2:
        raise ValueError("need at least two items")
    a = rankdata(p) - (p.size + 1) / 2.0
    b = rankdata(t) - (t.size + 1) / 2.0
    denom = math.sqrt(float(a @ a) * float(b @ b))
    if denom == 0:
        return math.nan
    return float(a @ b) / denom


def kendall_tau(pred, truth) -> float:
    """Tau-b; NaN when either side is all ties."""
    p, t = _pair_arrays(pred, truth)
    n = p.size
    if n < 2:
        raise ValueError("need at least two items")
    iu = np.triu_indices(n, 1)
    dp = np.sign(p[:, None] - p[None, :])[iu]
    dt = np.sign(t[:, None] - t[None, :])[iu]
    n0 = iu[0].size
    n1 = int(np.count_nonzero(dp == 0))
    n2 = int(np.count_nonzero(dt == 0))
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0:
        return math.nan
    return float(np.sum(dp * dt)) / denom


def rank_ids(ids, scores) -> list:
    """Ids ordered by score descending, ties by id ascending."""
    return [i for _, i in sorted(zip((-float(s) for s in scores), ids))]


def precision_at_k(pred_ranking, truth_ranking, k: int) -> float:
    """Overlap of the two top-k lists divided by k. Rankings are ordered id lists."""
    if not 1 <= k <= min(len(pred_ranking), len(truth_ranking)):
        raise ValueError(f"k={k} out of range for rankings of length {len(pred_ranking)}")
    return len(set(pred_ranking[:k]) & set(truth_ranking[:k])) / k


@dataclass
class QueryResult:
    query: str
    ranking: list  # (db id, predicted, true), predicted-descending
    metrics: dict = field(default_factory=dict)


@dataclass
class Report:
    method: str
    metrics: dict
    undefined: dict
    n_queries: int
    n_pairs: int
    time_per_pair: float
    queries: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "method": self.method, "metrics": self.metrics, "undefined": self.undefined,
            "n_queries": self.n_queries, "n_pairs": self.n_pairs, "time_per_pair_s": self.time_per_pair,
        }


def _timed_scores(method, pairs, batched: bool) -> tuple[np.ndarray, float]:
    start = time.perf_counter()
    if batched:
        scores = np.asarray(method(pairs), dtype=float)
    else:
        scores = np.array([method(a, b) for a, b in pairs], dtype=float)
    return scores, (time.perf_counter() - start) / max(len(pairs), 1)


def evaluate(method, dataset: Dataset, ks=(10, 20), *, name: str = "method", role: str = "test",
             batched: bool = False) -> Report:
    """Score every query's database pairs with ``method`` and average the per-query metrics.

    ``method(g1, g2) -> similarity``, or with ``batched=True`` a function of a list of pairs.
    Queries whose correlation is undefined (constant predictions or truth) are left out of
    that metric's average and counted in ``undefined``.
    """
    samples = dataset.samples.get(role, [])
    if not samples:
        raise ValueError(f"no {role} pairs to evaluate")
    pairs = [(dataset.graphs[s.i], dataset.graphs[s.j]) for s in samples]
    scores, per_pair = _timed_scores(method, pairs, batched)
    truth = np.array([s.similarity for s in samples])

    by_query = {}
    for k, s in enumerate(samples):
        by_query.setdefault(s.i, []).append(k)
    per_metric = {"rho": [], "tau": []}
    per_metric.update({f"p@{k}": [] for k in ks})
    undefined = {name_: 0 for name_ in per_metric}
    queries = []
    for q, idx in by_query.items():
        ids = [samples[k].j for k in idx]
        p, t = scores[idx], truth[idx]
        m = {"mse": mse(p, t), "rho": spearman_rho(p, t) if len(idx) > 1 else math.nan,
             "tau": kendall_tau(p, t) if len(idx) > 1 else math.nan}
        pred_rank, true_rank = rank_ids(ids, p), rank_ids(ids, t)
        for k in ks:
            m[f"p@{k}"] = precision_at_k(pred_rank, true_rank, k) if k <= len(ids) else math.nan
        for key in per_metric:
            if math.isnan(m[key]):
                undefined[key] += 1
            else:
                per_metric[key].append(m[key])
        lookup = dict(zip(ids, zip(p.tolist(), t.tolist())))
        queries.append(QueryResult(q, [(i, *lookup[i]) for i in pred_rank], m))

    metrics = {"mse": mse(scores, truth)}
    for key, vals in per_metric.items():
        metrics[key] = float(np.mean(vals)) if vals else math.nan
    return Report(name, metrics, undefined, len(by_query), len(samples), per_pair, queries)


def classical_method(algo: str, **kw):
    """Similarity from a GED algorithm through the same normalisation as the ground truth."""
    def score(g1, g2):
        d = compute_ged(algo, g1, g2, **kw).distance
        return ged_to_similarity(d, g1.num_nodes, g2.num_nodes)
    return score


def oracle_method(dataset: Dataset):
    truth = {(s.i, s.j): s.similarity for role in dataset.samples.values() for s in role}
    return lambda g1, g2: truth[(g1.id, g2.id)]


def _jsonable(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def write_reports(reports, json_path, csv_path=None) -> None:
    """JSON with every report, plus a flat ``method,metric,value`` CSV (defaults next to the JSON)."""
    json_path = Path(json_path)
    payload = {"reports": [{k: ({m: _jsonable(v) for m, v in val.items()} if k == "metrics" else val)
                            for k, val in r.to_json().items()} for r in reports]}
    json_path.write_text(json.dumps(payload, indent=1))
    csv_path = Path(csv_path) if csv_path else json_path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "metric", "value"])
        for r in reports:
            for m, v in r.metrics.items():
                w.writerow([r.method, m, v])
            w.writerow([r.method, "time_per_pair_s", r.time_per_pair])
