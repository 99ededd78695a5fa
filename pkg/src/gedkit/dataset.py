"""Labeled pair corpora: split graphs, compute ground-truth distances, batch, persist."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ged import BudgetExceededError, UNIT_COSTS, CostModel, ged_astar, ged_min_ensemble
from .ged.search import DEFAULT_BEAM_WIDTH, DEFAULT_BUDGET
from .graph import Graph, load_graphs, save_graphs

log = logging.getLogger(__name__)

SPLIT_FRACTIONS = (0.6, 0.2, 0.2)
DEFAULT_SIZE_THRESHOLD = 10


def normalized_ged(ged: float, n1: int, n2: int) -> float:
    if n1 + n2 == 0:
        return 0.0
    return ged / ((n1 + n2) / 2.0)


def ged_to_similarity(ged: float, n1: int, n2: int) -> float:
    return math.exp(-normalized_ged(ged, n1, n2))


@dataclass
class GraphPairSample:
    i: str
    j: str
    ged: float
    kind: str
    nged: float
    similarity: float
    algorithm: str = ""
    role: str = ""

    @classmethod
    def from_ged(cls, g1: Graph, g2: Graph, ged: float, kind: str, algorithm: str = "", role: str = ""):
        nged = normalized_ged(ged, g1.num_nodes, g2.num_nodes)
        return cls(g1.id, g2.id, float(ged), kind, nged, math.exp(-nged), algorithm, role)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "GraphPairSample":
        return cls(**obj)


@dataclass
class DatasetSplit:
    train: list
    val: list
    test: list

    def to_json(self) -> dict:
        return asdict(self)


def split_ids(ids, seed: int) -> DatasetSplit:
    """Seeded 60/20/20 partition; each part is returned in id order."""
    ids = sorted(ids)
    n = len(ids)
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(SPLIT_FRACTIONS[0] * n))
    n_val = min(int(round(SPLIT_FRACTIONS[1] * n)), n - n_train)
    pick = lambda idx: sorted(ids[k] for k in idx)  # noqa: E731
    return DatasetSplit(pick(perm[:n_train]), pick(perm[n_train:n_train + n_val]), pick(perm[n_train + n_val:]))


def pair_ids(split: DatasetSplit) -> dict:
    """Ordered id pairs per role: unordered train pairs, validation and test queries against the database."""
    train = [(a, b) for k, a in enumerate(split.train) for b in split.train[k + 1:]]
    val = [(q, d) for q in split.val for d in split.train]
    database = sorted(split.train + split.val)
    test = [(q, d) for q in split.test for d in database]
    return {"train": train, "val": val, "test": test}


def ground_truth(g1: Graph, g2: Graph, threshold: int = DEFAULT_SIZE_THRESHOLD, cm: CostModel = UNIT_COSTS,
                 budget: int | None = DEFAULT_BUDGET, width: int = DEFAULT_BEAM_WIDTH):
    """Exact A* for pairs up to ``threshold`` nodes, otherwise the smallest approximate distance."""
    if max(g1.num_nodes, g2.num_nodes) <= threshold:
        return ged_astar(g1, g2, cm, budget=budget)
    return ged_min_ensemble(g1, g2, cm, width)


def _label_pair(args):
    g1, g2, threshold, cm, budget, width = args
    try:
        r = ground_truth(g1, g2, threshold, cm, budget, width)
    except BudgetExceededError:
        return None
    return r.distance, r.kind, r.algorithm


@dataclass
class Dataset:
    graphs: dict
    split: DatasetSplit
    samples: dict = field(default_factory=dict)  # role -> list of GraphPairSample
    skipped: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def pairs(self, role: str) -> list:
        """``(g1, g2)`` graph pairs of a role, aligned with ``samples[role]``."""
        return [(self.graphs[s.i], self.graphs[s.j]) for s in self.samples[role]]

    def targets(self, role: str) -> np.ndarray:
        return np.array([s.similarity for s in self.samples[role]])

    def save(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_graphs(self.graphs.values(), out / "graphs.jsonl")
        with open(out / "pairs.jsonl", "w") as fh:
            for role in ("train", "val", "test"):
                for s in self.samples.get(role, []):
                    fh.write(json.dumps(s.to_json()) + "\n")
        info = {"split": self.split.to_json(), "skipped": [list(p) for p in self.skipped], "meta": self.meta}
        (out / "split.json").write_text(json.dumps(info, indent=1))

    @classmethod
    def load(cls, in_dir) -> "Dataset":
        src = Path(in_dir)
        graphs = {g.id: g for g in load_graphs(src / "graphs.jsonl")}
        info = json.loads((src / "split.json").read_text())
        samples = {"train": [], "val": [], "test": []}
        with open(src / "pairs.jsonl") as fh:
            for line in fh:
                if line.strip():
                    s = GraphPairSample.from_json(json.loads(line))
                    samples[s.role].append(s)
        return cls(graphs, DatasetSplit(**info["split"]), samples,
                   [tuple(p) for p in info.get("skipped", [])], info.get("meta", {}))


def build_dataset(graphs, threshold: int = DEFAULT_SIZE_THRESHOLD, seed: int = 0, *, cm: CostModel = UNIT_COSTS,
                  budget: int | None = DEFAULT_BUDGET, width: int = DEFAULT_BEAM_WIDTH, jobs: int = 1) -> Dataset:
    graphs = list(graphs)
    if not graphs:
        raise ValueError("need at least one graph")
    by_id = {g.id: g for g in graphs}
    if len(by_id) != len(graphs) or "" in by_id:
        raise ValueError("graph ids must be non-empty and unique")
    split = split_ids(by_id, seed)
    roles = pair_ids(split)
    work = [(role, a, b) for role in ("train", "val", "test") for a, b in roles[role]]
    tasks = [(by_id[a], by_id[b], threshold, cm, budget, width) for _, a, b in work]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_label_pair, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        results = [_label_pair(t) for t in tasks]

    samples = {"train": [], "val": [], "test": []}
    skipped = []
    for (role, a, b), res in zip(work, results):
        if res is None:
            skipped.append((a, b))
            log.warning("skipping pair %s/%s: search budget exhausted", a, b)
            continue
        dist, kind, algo = res
        samples[role].append(GraphPairSample.from_ged(by_id[a], by_id[b], dist, kind, algo, role))
    log.info("dataset: %d train, %d val, %d test pairs; %d skipped",
             len(samples["train"]), len(samples["val"]), len(samples["test"]), len(skipped))
    meta = {"seed": seed, "size_threshold": threshold, "n_skipped": len(skipped)}
    return Dataset(by_id, split, samples, skipped, meta)


def make_batches(samples, batch_size: int, seed: int, epoch: int = 0) -> list:
    """One epoch of shuffled batches; the final short batch is kept."""
    if batch_size < 1:
        raise ValueError("batch size must be >= 1")
    samples = list(samples)
    order = np.random.default_rng([seed, epoch]).permutation(len(samples))
    return [[samples[k] for k in order[s:s + batch_size]] for s in range(0, len(samples), batch_size)]
