"""Generate a small corpus, train a similarity model, and rank a query's neighbours.

Takes about 15 seconds on one core.  Run: python demos/train_and_rank.py
"""

import logging

from gedkit.dataset import build_dataset
from gedkit.graph import generate_corpus
from gedkit.metrics import classical_method, evaluate, rank_ids
from gedkit.model import SimGNNConfig
from gedkit.training import TrainConfig, predict_pairs, train

logging.basicConfig(level=logging.INFO, format="%(message)s")

graphs = generate_corpus(60, 4, 8, list("CNOS"), seed=1)
data = build_dataset(graphs, threshold=10, seed=1)
print({role: len(s) for role, s in data.samples.items()}, "pairs with exact ground truth")

result = train(data, SimGNNConfig(seed=1), TrainConfig(iterations=600, val_every=100, seed=1))
model = result.model
print(f"validation MSE {result.initial_val_mse:.4f} -> {result.best_val_mse:.4f}")

for name, method, batched in [("simgnn", lambda pairs: predict_pairs(model, pairs), True),
                              ("hungarian", classical_method("hungarian"), False)]:
    rep = evaluate(method, data, (5,), name=name, batched=batched)
    m = rep.metrics
    print(f"{name:>10}: mse {m['mse']:.4f} rho {m['rho']:.3f} tau {m['tau']:.3f} p@5 {m['p@5']:.3f} "
          f"({rep.time_per_pair * 1e3:.2f} ms/pair)")

query = data.graphs[data.split.test[0]]
database = sorted(data.split.train + data.split.val)
scores = predict_pairs(model, [(query, data.graphs[d]) for d in database])
truth = {s.j: s.similarity for s in data.samples["test"] if s.i == query.id}
print(f"\ntop matches for {query.id}:")
for d in rank_ids(database, scores)[:5]:
    print(f"  {d}: predicted {scores[database.index(d)]:.3f}, true {truth[d]:.3f}")
