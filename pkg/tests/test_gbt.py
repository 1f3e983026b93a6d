import numpy as np
import pytest
from oracles import brute_force_best_split

from alertscreen.gbt import (
    BoostedEnsemble,
    TrainConfig,
    Tree,
    bin_features,
    compute_bin_edges,
    find_best_split,
    train_initial,
    warm_start_update,
)
from alertscreen.objectives import HESS_FLOOR, Objective, grad_hess


def _leaf_tree(value):
    return Tree([-1], [0.0], [-1], [-1], [value])


def _empty_ensemble(n_features=2, base_score=0.0, lr=0.1):
    return BoostedEnsemble(
        trees=[],
        base_score=base_score,
        learning_rate=lr,
        max_depth=6,
        max_trees=500,
        bin_edges=[np.empty(0)] * n_features,
        n_features=n_features,
        rng=np.random.default_rng(0),
    )


def _separable_data(seed=0, n=200):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 2))
    y = (X[:, 0] > 0.0).astype(np.int64)
    # keep a margin so the split is clean
    X[:, 0] += np.where(y == 1, 0.1, -0.1)
    return X, y


def test_empty_ensemble_predicts_half():
    ens = _empty_ensemble()
    p = ens.predict_proba(np.zeros((5, 2)))
    assert np.all(p == 0.5)


def test_single_leaf_tree_prediction():
    ens = _empty_ensemble()
    ens.trees.append(_leaf_tree(3.0))
    p = ens.predict_proba(np.zeros((1, 2)))
    assert p[0] == pytest.approx(1.0 / (1.0 + np.exp(-0.3)), rel=1e-12)


def test_adding_positive_leaf_tree_increases_every_probability():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(50, 3))
    y = rng.integers(0, 2, 50)
    y[:5] = 1
    y[5:10] = 0
    ens = train_initial(X, y, Objective(kind="plain-logistic"), TrainConfig(initial_rounds=10), seed=1)
    before = ens.predict_proba(X)
    ens.trees.append(_leaf_tree(0.5))
    after = ens.predict_proba(X)
    assert np.all(after > before)


def test_predictions_strictly_inside_unit_interval():
    ens = _empty_ensemble(base_score=80.0)
    p = ens.predict_proba(np.zeros((3, 2)))
    assert np.all(p > 0.0) and np.all(p < 1.0)


def test_prediction_invariant_to_tree_order():
    X, y = _separable_data(seed=2)
    ens = train_initial(X, y, Objective(), TrainConfig(initial_rounds=20), seed=3)
    p = ens.predict_proba(X)
    rng = np.random.default_rng(0)
    shuffled = list(ens.trees)
    rng.shuffle(shuffled)
    ens.trees = shuffled
    assert np.allclose(p, ens.predict_proba(X), rtol=1e-12, atol=1e-15)


def test_width_mismatch_raises():
    ens = _empty_ensemble(n_features=3)
    with pytest.raises(ValueError):
        ens.predict_proba(np.zeros((2, 4)))


def test_separable_training_reaches_full_accuracy():
    X, y = _separable_data()
    ens = train_initial(X, y, Objective(), TrainConfig(), seed=42)
    assert ens.n_trees == 100
    acc = ((ens.predict_proba(X) >= 0.5).astype(int) == y).mean()
    assert acc == 1.0


def test_first_tree_splits_on_the_label_feature():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(300, 3))
    y = (X[:, 1] > 0.0).astype(np.int64)
    ens = train_initial(X, y, Objective(), TrainConfig(initial_rounds=5), seed=0)
    assert ens.trees[0].root_feature() == 1


def test_histogram_split_matches_brute_force():
    # few distinct values per feature, so bin midpoints enumerate every cut
    rng = np.random.default_rng(13)
    n = 400
    X = np.column_stack(
        [
            rng.choice(rng.normal(size=40), size=n),
            rng.choice(rng.normal(size=25), size=n),
            rng.choice(rng.normal(size=60), size=n),
        ]
    )
    p = rng.uniform(0.05, 0.95, n)
    y = rng.integers(0, 2, n)
    g, h = grad_hess(p, y, Objective(), hess_floor=HESS_FLOOR)
    l2, mcw = 1.0, 1.0

    edges = compute_bin_edges(X, 256)
    binned = bin_features(X, edges)
    n_bins = [e.size + 1 for e in edges]
    rows = np.arange(n)
    feats = np.arange(3)
    got = find_best_split(binned, g, h, rows, feats, n_bins, l2, mcw)
    expected = brute_force_best_split(X, g, h, l2, mcw, edges)
    assert got is not None and expected is not None
    f, b, gain = got
    assert (f, edges[f][b]) == (expected[0], expected[1])
    assert gain == pytest.approx(expected[2], rel=1e-9)


def test_training_is_deterministic_per_seed():
    X, y = _separable_data(seed=4)
    cfg = TrainConfig(initial_rounds=30)
    a = train_initial(X, y, Objective(), cfg, seed=42)
    b = train_initial(X, y, Objective(), cfg, seed=42)
    assert a.dump() == b.dump()


def test_single_class_training_rejected():
    X = np.zeros((10, 2))
    with pytest.raises(ValueError):
        train_initial(X, np.zeros(10, dtype=int), Objective(), TrainConfig())
    with pytest.raises(ValueError):
        train_initial(X, np.ones(10, dtype=int), Objective(), TrainConfig())


def test_warm_start_preserves_tree_prefix():
    X, y = _separable_data(seed=8)
    ens = train_initial(X, y, Objective(), TrainConfig(initial_rounds=15), seed=5)
    before = [ens.dump_tree(i) for i in range(ens.n_trees)]
    result = warm_start_update(ens, X, y, Objective(), TrainConfig(rounds_per_update=10))
    after = result.ensemble
    assert after.n_trees == 25 and result.appended == 10 and not result.cap_reached
    for i, text in enumerate(before):
        assert after.dump_tree(i) == text
    # original value untouched (caller hot-swaps)
    assert ens.n_trees == 15


def test_warm_start_loss_non_increasing_on_same_batch():
    X, y = _separable_data(seed=10)
    obj = Objective()
    ens = train_initial(X, y, obj, TrainConfig(initial_rounds=20), seed=6)
    from alertscreen.objectives import loss

    cfg = TrainConfig(rounds_per_update=1)
    prev = loss(ens.predict_proba(X), y, obj).mean()
    for _ in range(10):
        ens = warm_start_update(ens, X, y, obj, cfg).ensemble
        cur = loss(ens.predict_proba(X), y, obj).mean()
        assert cur <= prev + 1e-12
        prev = cur


def test_warm_start_cap_arithmetic():
    X, y = _separable_data(seed=12)
    cfg = TrainConfig(initial_rounds=5, rounds_per_update=10, max_trees=15)
    ens = train_initial(X, y, Objective(), cfg, seed=7)
    grown = warm_start_update(ens, X, y, Objective(), cfg)
    assert grown.ensemble.n_trees == 15 and grown.appended == 10 and grown.cap_reached

    cfg_cap = TrainConfig(initial_rounds=12, rounds_per_update=10, max_trees=15)
    ens = train_initial(X, y, Objective(), cfg_cap, seed=7)
    partial = warm_start_update(ens, X, y, Objective(), cfg_cap)
    assert partial.ensemble.n_trees == 15 and partial.appended == 3 and partial.cap_reached
    noop = warm_start_update(partial.ensemble, X, y, Objective(), cfg_cap)
    assert noop.appended == 0 and noop.cap_reached and noop.status == "cap-reached"
    assert noop.ensemble.n_trees == 15


def test_warm_start_on_all_negative_batch_pushes_scores_down():
    X, y = _separable_data(seed=14)
    ens = train_initial(X, y, Objective(), TrainConfig(initial_rounds=20), seed=8)
    rng = np.random.default_rng(2)
    X_neg = rng.uniform(-1.0, 0.0, size=(64, 2))
    y_neg = np.zeros(64, dtype=np.int64)
    before = ens.predict_proba(X_neg).mean()
    updated = warm_start_update(ens, X_neg, y_neg, Objective(), TrainConfig()).ensemble
    assert updated.predict_proba(X_neg).mean() < before


def test_warm_start_rejects_empty_batch():
    X, y = _separable_data(seed=15)
    ens = train_initial(X, y, Objective(), TrainConfig(initial_rounds=5), seed=9)
    with pytest.raises(ValueError):
        warm_start_update(ens, np.zeros((0, 2)), np.zeros(0, dtype=int), Objective(), TrainConfig())


def test_dump_load_round_trip_is_byte_identical():
    X, y = _separable_data(seed=16)
    ens = train_initial(X, y, Objective(), TrainConfig(initial_rounds=25), seed=10)
    text = ens.dump()
    loaded = BoostedEnsemble.load(text)
    assert loaded.dump() == text
    assert np.array_equal(loaded.predict_proba(X), ens.predict_proba(X))
