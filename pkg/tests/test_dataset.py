import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gedkit.dataset import (
    Dataset,
    GraphPairSample,
    build_dataset,
    ged_to_similarity,
    make_batches,
    normalized_ged,
    pair_ids,
    split_ids,
)
from gedkit.ged import EXACT, UPPER_BOUND, ged_astar
from gedkit.graph import generate_corpus, generate_graph, permute_nodes

from conftest import three_edit_pair


def test_formulas():
    assert normalized_ged(3, 5, 5) == pytest.approx(0.6)
    assert ged_to_similarity(3, 5, 5) == pytest.approx(math.exp(-0.6))
    assert ged_to_similarity(3, 5, 5) == pytest.approx(0.5488, abs=1e-4)
    assert ged_to_similarity(0, 4, 7) == 1.0
    assert ged_to_similarity(0, 0, 0) == 1.0


def test_sample_from_three_edit_pair():
    a, b = three_edit_pair()
    s = GraphPairSample.from_ged(a, b, ged_astar(a, b).distance, EXACT)
    assert (s.ged, s.nged) == (3.0, pytest.approx(0.6))
    assert s.similarity == pytest.approx(math.exp(-0.6))


@given(st.integers(0, 20), st.integers(0, 20), st.integers(1, 10), st.integers(1, 10))
def test_similarity_monotone_and_bounded(d1, d2, n1, n2):
    s1, s2 = ged_to_similarity(d1, n1, n2), ged_to_similarity(d2, n1, n2)
    assert 0 < s1 <= 1 and (s1 == 1) == (d1 == 0)
    if d1 < d2:
        assert s1 > s2
    assert normalized_ged(d1, n1, n2) == normalized_ged(d1, n2, n1)


def test_split_sizes_and_determinism():
    ids = [f"g{k}" for k in range(10)]
    s = split_ids(ids, 3)
    assert (len(s.train), len(s.val), len(s.test)) == (6, 2, 2)
    assert sorted(s.train + s.val + s.test) == sorted(ids)
    assert split_ids(ids, 3) == s
    assert split_ids(ids, 4) != s


def test_pair_sets():
    s = split_ids([f"g{k}" for k in range(10)], 0)
    roles = pair_ids(s)
    assert len(roles["train"]) == 15 and all(a < b for a, b in roles["train"])
    assert len(roles["val"]) == 12 and len(roles["test"]) == 16
    test_ids = set(s.test)
    assert not any(a in test_ids or b in test_ids for a, b in roles["train"] + roles["val"])
    assert all(a in test_ids and b not in test_ids for a, b in roles["test"])


def test_build_small(tmp_path):
    g = generate_graph(4, 0.3, ["C", "N"], 0)
    gs = [g.with_id("a"), permute_nodes(g, [3, 2, 1, 0]).with_id("b")] + \
        [generate_graph(5, 0.3, ["C", "N"], k, id=f"x{k}") for k in range(8)]
    ds = build_dataset(gs, seed=1)
    for role in ("train", "val", "test"):
        for s in ds.samples[role]:
            assert s.kind == EXACT and s.role == role
            assert s.similarity == pytest.approx(math.exp(-s.nged))
            if {s.i, s.j} == {"a", "b"}:
                assert s.similarity == 1.0
    ds.save(tmp_path / "d")
    back = Dataset.load(tmp_path / "d")
    assert back.graphs == ds.graphs and back.samples == ds.samples and back.split == ds.split


def test_large_pairs_use_ensemble():
    gs = [generate_graph(n, 0.2, ["C"], n, id=f"g{n}") for n in (3, 4, 5, 6, 7)]
    ds = build_dataset(gs, threshold=4, seed=0)
    for role in ds.samples.values():
        for s in role:
            big = max(ds.graphs[s.i].num_nodes, ds.graphs[s.j].num_nodes) > 4
            assert s.kind == (UPPER_BOUND if big else EXACT)


def test_budget_exhaustion_skips_pairs(caplog):
    gs = [generate_graph(8, 0.4, None, k, id=f"g{k}") for k in range(5)]
    ds = build_dataset(gs, seed=0, budget=1)
    assert ds.skipped and ds.meta["n_skipped"] == len(ds.skipped)
    assert "budget" in caplog.text
    done = {(s.i, s.j) for role in ds.samples.values() for s in role}
    assert not done & set(ds.skipped)


def test_parallel_build_matches_serial():
    gs = generate_corpus(12, 3, 6, ["C", "N"], seed=4)
    assert build_dataset(gs, seed=2, jobs=2).samples == build_dataset(gs, seed=2, jobs=1).samples


def test_input_validation():
    with pytest.raises(ValueError):
        build_dataset([])
    g = generate_graph(3, 0.3, None, 0, id="same")
    with pytest.raises(ValueError):
        build_dataset([g, g])


def test_make_batches():
    items = list(range(5))
    batches = make_batches(items, 2, seed=0)
    assert [len(b) for b in batches] == [2, 2, 1]
    assert sorted(sum(batches, [])) == items
    assert make_batches(items, 2, seed=0) == batches
    orders = {tuple(sum(make_batches(list(range(20)), 4, seed=0, epoch=e), [])) for e in range(5)}
    assert len(orders) == 5
    with pytest.raises(ValueError):
        make_batches(items, 0, seed=0)


def test_toy_dataset_properties(toy_dataset):
    ds = toy_dataset
    test_ids = set(ds.split.test)
    assert not any(s.i in test_ids or s.j in test_ids for s in ds.samples["train"])
    sims = np.concatenate([ds.targets(r) for r in ("train", "val", "test")])
    assert np.all((sims > 0) & (sims <= 1))
    assert len(ds.samples["train"]) == 36 * 35 // 2
