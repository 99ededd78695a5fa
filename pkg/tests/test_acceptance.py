"""End-to-end acceptance checks, one test per criterion.

The terminal summary (see conftest) prints one PASS/FAIL line per criterion.
"""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import three_edit_pair
from gedkit.dataset import build_dataset, ged_to_similarity, normalized_ged
from gedkit.ged import ged_astar, ged_bruteforce, ged_hungarian, ged_min_ensemble, ged_vj
from gedkit.ged.search import ged_beam
from gedkit.graph import LabelEncoder, generate_corpus, generate_graph, permute_nodes
from gedkit.metrics import evaluate, kendall_tau, oracle_method, spearman_rho
from gedkit.model import SimGNN, SimGNNConfig
from gedkit.numerics.gradcheck import analytic_gradients, check_gradients
from gedkit.selftest import random_pair
from gedkit.training import TrainConfig, predict_pairs, train

pytestmark = pytest.mark.acceptance

CRITERIA = {
    1: "A* equals brute force on >=500 small pairs in under 2 min",
    2: "approximate methods bound exact GED; ensemble <= members",
    3: "three-edit pair: GED 3, nGED 0.6, similarity exp(-0.6)",
    4: "model gradients match finite differences",
    5: "predictions invariant to node order",
    6: "desk-scale learning on a synthetic corpus",
    7: "histogram branch carries no gradient; training stays finite",
    8: "inference speed ordering",
    9: "metric oracles",
    10: "checkpoint round trip is bitwise",
}


def criterion(n):
    return pytest.mark.criterion(n, CRITERIA[n])


@pytest.fixture(scope="module")
def small_pairs():
    rng = np.random.default_rng(2024)
    return [random_pair(rng, max_nodes=6) for _ in range(520)]


@pytest.fixture(scope="module")
def exact_distances(small_pairs):
    return [ged_bruteforce(g1, g2).distance for g1, g2 in small_pairs]


@criterion(1)
def test_exact_search_matches_bruteforce(small_pairs, exact_distances):
    labeled = sum(g1.is_labeled for g1, _ in small_pairs)
    assert 0 < labeled < len(small_pairs)
    start = time.perf_counter()
    got = [ged_astar(g1, g2).distance for g1, g2 in small_pairs]
    elapsed = time.perf_counter() - start
    mismatches = [k for k, (a, b) in enumerate(zip(got, exact_distances)) if a != b]
    print(f"\n{len(small_pairs)} pairs, A* {elapsed:.1f}s, {len(mismatches)} mismatches")
    assert not mismatches
    assert all(float(d).is_integer() for d in got)
    assert elapsed < 120


@criterion(2)
def test_upper_bounds(small_pairs, exact_distances):
    violations = 0
    for (g1, g2), exact in zip(small_pairs, exact_distances):
        members = [ged_beam(g1, g2, width=5).distance, ged_hungarian(g1, g2).distance, ged_vj(g1, g2).distance]
        ens = ged_min_ensemble(g1, g2).distance
        violations += sum(d < exact for d in members + [ens]) + sum(ens > d for d in members)
    assert violations == 0


@criterion(3)
def test_three_edit_pair():
    g1, g2 = three_edit_pair()
    ged = ged_astar(g1, g2).distance
    assert ged == 3 == ged_bruteforce(g1, g2).distance
    nged = normalized_ged(ged, g1.num_nodes, g2.num_nodes)
    assert nged == pytest.approx(0.6, abs=1e-12)
    assert ged_to_similarity(ged, g1.num_nodes, g2.num_nodes) == pytest.approx(math.exp(-0.6), abs=1e-12)


@criterion(4)
@pytest.mark.parametrize("strategy2", [True, False])
def test_gradient_check(strategy2):
    enc = LabelEncoder(["C", "N", "O"])
    g1 = generate_graph(4, 0.5, enc.labels, 41)
    g2 = generate_graph(5, 0.5, enc.labels, 42)
    model = SimGNN(SimGNNConfig((8, 8, 4), 4, 4, (16, 8, 4, 1), "learnable-gc", strategy2, 3), enc)
    bad = check_gradients(lambda: model.loss([(g1, g2)], [0.4]), model.params, atol=1e-5, rtol=1e-4)
    assert not bad, bad[:5]


@criterion(5)
def test_permutation_invariance():
    rng = np.random.default_rng(5)
    enc = LabelEncoder(["C", "N", "O", "S"])
    model = SimGNN(SimGNNConfig(seed=5), enc)
    worst = 0.0
    for _ in range(100):
        g1 = generate_graph(int(rng.integers(2, 11)), 0.3, enc.labels, int(rng.integers(2**31)))
        g2 = generate_graph(int(rng.integers(2, 11)), 0.3, enc.labels, int(rng.integers(2**31)))
        base = model.predict(g1, g2)
        perms = [(permute_nodes(g1, rng.permutation(g1.num_nodes)), permute_nodes(g2, rng.permutation(g2.num_nodes)))
                 for _ in range(5)]
        worst = max(worst, *(abs(s - base) for s in model.predict_many(perms)))
    assert worst < 1e-9


# Shared desk-scale corpus and training runs, trained lazily and reused across criteria.

@pytest.fixture(scope="module")
def desk_dataset():
    return build_dataset(generate_corpus(100, 4, 8, list("CNOS"), 0), threshold=10, seed=0)


@pytest.fixture(scope="module")
def desk_train(desk_dataset):
    @lru_cache(maxsize=None)
    def run(pooling, strategy2, seed=0):
        start = time.perf_counter()
        result = train(desk_dataset, SimGNNConfig(pooling=pooling, strategy2=strategy2, seed=seed),
                       TrainConfig(iterations=2000, seed=seed))
        result.seconds = time.perf_counter() - start
        return result
    return run


def test_desk_corpus_shape(desk_dataset):
    sizes = [g.num_nodes for g in desk_dataset.graphs.values()]
    assert len(sizes) == 100 and min(sizes) >= 4 and max(sizes) <= 8
    assert all(g.is_connected() for g in desk_dataset.graphs.values())
    assert {s.kind for role in desk_dataset.samples.values() for s in role} == {"exact"}
    assert not desk_dataset.skipped


@criterion(6)
def test_desk_learning_val_mse_halves(desk_train):
    r = desk_train("learnable-gc", True)
    print(f"\ninitial val MSE {r.initial_val_mse:.5f}, best {r.best_val_mse:.5f} at {r.best_iteration}, "
          f"{r.seconds:.0f}s")
    assert r.seconds < 600
    assert r.best_val_mse < 0.5 * r.initial_val_mse


@criterion(6)
def test_desk_learning_ranking(desk_dataset, desk_train):
    model = desk_train("learnable-gc", True).model
    rep = evaluate(lambda pairs: predict_pairs(model, pairs), desk_dataset, (10,), batched=True)
    print(f"\ntest rho {rep.metrics['rho']:.3f} tau {rep.metrics['tau']:.3f} mse {rep.metrics['mse']:.5f}")
    assert rep.metrics["rho"] >= 0.5
    assert rep.metrics["tau"] >= 0.35


def _test_mse(dataset, model):
    return float(np.mean((predict_pairs(model, dataset.pairs("test")) - dataset.targets("test")) ** 2))


@criterion(6)
def test_desk_learning_beats_simple_mean(desk_dataset, desk_train):
    full = _test_mse(desk_dataset, desk_train("learnable-gc", True).model)
    simple = _test_mse(desk_dataset, desk_train("simple-mean", False).model)
    print(f"\nSimGNN {full:.5f} vs SimpleMean {simple:.5f}")
    assert full <= simple


@criterion(6)
def test_desk_learning_learnable_context(desk_dataset, desk_train):
    wins = []
    for seed in (0, 1, 2):
        lgc = _test_mse(desk_dataset, desk_train("learnable-gc", False, seed).model)
        gc = _test_mse(desk_dataset, desk_train("global-context", False, seed).model)
        print(f"\nseed {seed}: AttLearnableGC {lgc:.5f} vs AttGlobalContext {gc:.5f}")
        wins.append(lgc <= gc)
    assert sum(wins) >= 2


@criterion(7)
def test_training_stays_finite(desk_train):
    r = desk_train("learnable-gc", True)
    values = [e[k] for e in r.log for k in ("train_loss", "val_mse") if e[k] is not None]
    assert values and all(math.isfinite(v) for v in values)
    assert all(np.isfinite(p.data).all() for p in r.model.params.values())


@criterion(7)
def test_histogram_stop_gradient():
    enc = LabelEncoder(["C", "N", "O"])
    pairs = [(generate_graph(5, 0.4, enc.labels, 70 + k), generate_graph(6, 0.4, enc.labels, 80 + k))
             for k in range(4)]
    targets = [0.2, 0.4, 0.6, 0.8]
    s2 = SimGNN(SimGNNConfig((16, 8, 8), 4, 4, seed=1, strategy2=True), enc)
    s1 = SimGNN(SimGNNConfig((16, 8, 8), 4, 4, seed=2, strategy2=False), enc)
    s2.params["fc.0.hist_weight"].data[:] = 0.0
    for name, p in s1.params.items():
        p.data[:] = s2.params[name].data
    g2 = analytic_gradients(lambda: s2.loss(pairs, targets), s2.params)
    g1 = analytic_gradients(lambda: s1.loss(pairs, targets), s1.params)
    assert set(g1) == set(g2) - {"fc.0.hist_weight"}
    for name in g1:
        assert np.array_equal(g1[name], g2[name]), name


def _per_pair_seconds(fn, pairs, repeats=3):
    times = []
    for g1, g2 in pairs:
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            fn(g1, g2)
            best = min(best, time.perf_counter() - start)
        times.append(best)
    return float(np.mean(times))


@criterion(8)
def test_speed_ordering(desk_train):
    rng = np.random.default_rng(8)
    pairs = [tuple(generate_graph(10, 0.25, list("CNOS"), int(rng.integers(2**31))) for _ in range(2))
             for _ in range(100)]
    with_hist = desk_train("learnable-gc", True).model
    without_hist = desk_train("learnable-gc", False).model
    t_astar = _per_pair_seconds(lambda a, b: ged_astar(a, b), pairs, repeats=1)
    t_s2 = _per_pair_seconds(with_hist.predict, pairs)
    t_s1 = _per_pair_seconds(without_hist.predict, pairs)
    print(f"\nper pair: A* {t_astar * 1e3:.2f} ms, SimGNN {t_s2 * 1e3:.3f} ms, "
          f"without histogram {t_s1 * 1e3:.3f} ms")
    assert t_s2 * 10 <= t_astar
    assert t_s2 <= 2 * t_s1


@criterion(9)
def test_metric_oracles(desk_dataset):
    assert abs(spearman_rho([1, 2, 3, 4], [1, 2, 4, 3]) - 0.8) < 1e-12
    assert abs(kendall_tau([1, 2, 3], [1, 3, 2]) - 1 / 3) < 1e-12
    rep = evaluate(oracle_method(desk_dataset), desk_dataset, (10, 20))
    assert rep.metrics["mse"] == 0
    for key in ("rho", "tau", "p@10", "p@20"):
        assert rep.metrics[key] == pytest.approx(1.0, abs=1e-12)


@criterion(10)
def test_checkpoint_round_trip(tmp_path, desk_dataset, desk_train):
    model = desk_train("learnable-gc", True).model
    pairs = desk_dataset.pairs("test")[:50]
    before = predict_pairs(model, pairs)
    model.save(tmp_path / "ckpt.json")
    loaded = SimGNN.load(tmp_path / "ckpt.json")
    assert np.array_equal(before, predict_pairs(loaded, pairs))
    singles = [model.predict(a, b) for a, b in pairs]
    assert singles == [loaded.predict(a, b) for a, b in pairs]
