from __future__ import annotations

import math

import numpy as np
import pytest

from idlink.evalharness import roc_auc
from idlink.learners import (
    Dataset,
    ForestParams,
    load_model,
    predict_proba,
    predict_proba_matrix,
    save_model,
    train_decision_tree,
    train_naive_bayes,
    train_random_forest,
)


def dataset(x, y, names=None, classes=("neg", "pos")):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = tuple(names or (f"f{i}" for i in range(x.shape[1])))
    return Dataset(feature_names=names, x=x, y=np.asarray(y, dtype=int), classes=classes)


def gaussian_clusters(rng, n=200, gap=8.0):
    x0 = rng.normal(loc=0.0, scale=1.0, size=n // 2)
    x1 = rng.normal(loc=gap, scale=1.0, size=n // 2)
    x = np.concatenate([x0, x1])
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    return dataset(x, y)


def nb_bayes_rule_oracle(model, x):
    """Closed-form posterior argmax from the fitted parameters."""
    means = np.asarray(model.params["means"])
    variances = np.asarray(model.params["variances"])
    priors = np.asarray(model.params["priors"])
    preds = []
    for row in np.atleast_2d(x):
        log_posts = []
        for c in range(len(model.classes)):
            lp = math.log(priors[c])
            for j, v in enumerate(row):
                var = variances[c][j]
                lp += -0.5 * math.log(2 * math.pi * var) - (v - means[c][j]) ** 2 / (2 * var)
            log_posts.append(lp)
        preds.append(int(np.argmax(log_posts)))
    return np.array(preds)


class TestNaiveBayes:
    def test_separated_clusters_high_accuracy(self):
        rng = np.random.default_rng(0)
        ds = gaussian_clusters(rng)
        model = train_naive_bayes(ds)
        probs = predict_proba_matrix(model, ds.x)
        acc = (np.argmax(probs, axis=1) == ds.y).mean()
        assert acc >= 0.95
        # every prediction agrees with the closed-form Bayes rule on the
        # same fitted parameters
        assert (np.argmax(probs, axis=1) == nb_bayes_rule_oracle(model, ds.x)).all()

    def test_constant_feature_no_effect_on_argmax(self):
        rng = np.random.default_rng(1)
        base = gaussian_clusters(rng, n=100)
        with_const = dataset(
            np.column_stack([base.x[:, 0], np.full(base.n, 7.0)]), base.y
        )
        m1 = train_naive_bayes(base)
        m2 = train_naive_bayes(with_const)
        p1 = predict_proba_matrix(m1, base.x)
        p2 = predict_proba_matrix(m2, with_const.x)
        assert (np.argmax(p1, axis=1) == np.argmax(p2, axis=1)).all()

    def test_single_instance_per_class(self):
        ds = dataset([[0.0], [1.0]], [0, 1])
        model = train_naive_bayes(ds)
        assert min(min(row) for row in model.params["variances"]) >= 1e-9
        probs = predict_proba(model, {"f0": 0.0})
        assert probs["neg"] > probs["pos"]

    def test_missing_class_errors(self):
        ds = dataset([[0.0], [1.0]], [0, 0])
        with pytest.raises(ValueError, match="missing class"):
            train_naive_bayes(ds)

    def test_affine_rescaling_keeps_argmax(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(120, 3))
        y = (x[:, 0] + 0.3 * x[:, 1] > 0).astype(int)
        ds1 = dataset(x, y)
        scaled = x * np.array([10.0, 0.5, 3.0]) + np.array([5.0, -2.0, 0.0])
        ds2 = dataset(scaled, y)
        p1 = predict_proba_matrix(train_naive_bayes(ds1), ds1.x)
        p2 = predict_proba_matrix(train_naive_bayes(ds2), ds2.x)
        assert (np.argmax(p1, axis=1) == np.argmax(p2, axis=1)).all()


def tree_depth(node, depth=1):
    if node["kind"] == "leaf":
        return depth
    return max(tree_depth(node["left"], depth + 1), tree_depth(node["right"], depth + 1))


class TestDecisionTree:
    def test_threshold_separable_depth_one(self):
        x = np.array([[0.1], [0.2], [0.9], [1.0]])
        y = np.array([0, 0, 1, 1])
        model = train_decision_tree(dataset(x, y))
        assert tree_depth(model.params["tree"]) == 2  # one split, two leaves
        probs = predict_proba_matrix(model, x)
        assert (np.argmax(probs, axis=1) == y).all()

    def test_pure_dataset_single_leaf(self):
        x = np.array([[0.0], [1.0], [2.0]])
        model = train_decision_tree(dataset(x, [1, 1, 1]))
        assert model.params["tree"]["kind"] == "leaf"

    def test_xor_exact(self):
        # balanced XOR: every single split has zero gain, so the plateau
        # fallback must still carve the space
        corners = [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
        rows = [(a, b, lab) for a, b, lab in corners for _ in range(3)]
        x = np.array([[r[0], r[1]] for r in rows], dtype=float)
        y = np.array([r[2] for r in rows])
        model = train_decision_tree(dataset(x, y))
        probs = predict_proba_matrix(model, x)
        assert (np.argmax(probs, axis=1) == y).all()
        assert tree_depth(model.params["tree"]) == 3  # two levels of splits

    def test_consistent_dataset_fits_exactly_with_min_leaf_one(self):
        rng = np.random.default_rng(3)
        x = rng.integers(0, 4, size=(60, 3)).astype(float)
        # labels are a deterministic function of the features
        y = ((x[:, 0] + 2 * x[:, 1] + x[:, 2]) % 2).astype(int)
        model = train_decision_tree(dataset(x, y), min_leaf=1)
        probs = predict_proba_matrix(model, x)
        assert (np.argmax(probs, axis=1) == y).all()

    def test_empty_dataset_errors(self):
        with pytest.raises(ValueError):
            train_decision_tree(dataset(np.empty((0, 1)), []))


class TestRandomForest:
    def _separable(self, rng, n=400):
        x = rng.normal(size=(n, 2))
        y = (x[:, 0] + x[:, 1] > 0).astype(int)
        return dataset(x, y)

    def test_same_seed_identical_predictions(self):
        rng = np.random.default_rng(4)
        ds = self._separable(rng)
        held = rng.normal(size=(50, 2))
        p1 = predict_proba_matrix(train_random_forest(ds, ForestParams(n_trees=15, seed=9)), held)
        p2 = predict_proba_matrix(train_random_forest(ds, ForestParams(n_trees=15, seed=9)), held)
        assert np.array_equal(p1, p2)

    def test_reduces_to_single_tree(self):
        rng = np.random.default_rng(5)
        ds = self._separable(rng, n=80)
        forest = train_random_forest(
            ds, ForestParams(n_trees=1, features_per_split=2, seed=0, bootstrap=False)
        )
        tree = train_decision_tree(ds, min_leaf=1)
        held = rng.normal(size=(40, 2))
        assert np.array_equal(
            predict_proba_matrix(forest, held), predict_proba_matrix(tree, held)
        )

    def test_separable_holdout_auc(self):
        rng = np.random.default_rng(6)
        train = self._separable(rng, n=400)
        test = self._separable(rng, n=200)
        model = train_random_forest(train, ForestParams(n_trees=100, seed=1))
        probs = predict_proba_matrix(model, test.x)
        assert roc_auc(probs[:, 1], test.y == 1) >= 0.95

    def test_tree_order_invariance(self):
        rng = np.random.default_rng(7)
        ds = self._separable(rng, n=100)
        model = train_random_forest(ds, ForestParams(n_trees=8, seed=2))
        held = rng.normal(size=(30, 2))
        before = predict_proba_matrix(model, held)
        model.params["trees"] = list(reversed(model.params["trees"]))
        after = predict_proba_matrix(model, held)
        assert np.allclose(before, after)

    def test_oob_accuracy_recorded(self):
        rng = np.random.default_rng(8)
        ds = self._separable(rng, n=200)
        model = train_random_forest(ds, ForestParams(n_trees=30, seed=3))
        assert model.params["oob_accuracy"] is not None
        assert model.params["oob_accuracy"] > 0.8


class TestPredictProba:
    def test_distribution_sums_to_one(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(60, 2))
        y = (x[:, 0] > 0).astype(int)
        for trainer in (
            train_naive_bayes,
            train_decision_tree,
            lambda ds: train_random_forest(ds, ForestParams(n_trees=5, seed=0)),
        ):
            model = trainer(dataset(x, y))
            probs = predict_proba_matrix(model, x)
            assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)
            assert (probs >= 0).all()

    def test_pure_leaf_degenerate_distribution(self):
        x = np.array([[0.0], [1.0]])
        model = train_decision_tree(dataset(x, [0, 1]), min_leaf=1)
        probs = predict_proba(model, {"f0": 0.0})
        assert probs == {"neg": 1.0, "pos": 0.0}

    def test_nb_symmetric_case(self):
        x = np.array([[0.0], [1.0]])
        model = train_naive_bayes(dataset(x, [0, 1]))
        probs = predict_proba(model, {"f0": 0.5})
        assert probs["neg"] == pytest.approx(0.5)
        assert probs["pos"] == pytest.approx(0.5)

    def test_schema_mismatch_rejected(self):
        x = np.array([[0.0], [1.0]])
        model = train_naive_bayes(dataset(x, [0, 1]))
        with pytest.raises(ValueError, match="schema"):
            predict_proba(model, {"wrong": 1.0})
        with pytest.raises(ValueError):
            predict_proba(model, [1.0, 2.0])


class TestPersistence:
    def test_round_trip_all_kinds(self, tmp_path):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(80, 2))
        y = (x[:, 0] > 0).astype(int)
        ds = dataset(x, y)
        held = rng.normal(size=(20, 2))
        for name, trainer in (
            ("nb", train_naive_bayes),
            ("tree", train_decision_tree),
            ("forest", lambda d: train_random_forest(d, ForestParams(n_trees=6, seed=4))),
        ):
            model = trainer(ds)
            path = tmp_path / f"{name}.json"
            save_model(model, path)
            again = load_model(path)
            assert np.allclose(
                predict_proba_matrix(model, held), predict_proba_matrix(again, held)
            )

    def test_rejects_unknown_format(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "other"}')
        with pytest.raises(ValueError, match="format"):
            load_model(path)
