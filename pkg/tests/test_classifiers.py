import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsurv.cart import Leaf, Split, TreeConfig, build_tree
from bcsurv.classifiers import (
    KnnModel,
    LogisticConfig,
    SvcConfig,
    child_rng,
    et_fit,
    fit_model,
    forest_score,
    knn_distance,
    knn_fit,
    knn_score,
    lr_fit,
    lr_gradient,
    lr_loss,
    ovo_ensemble_size,
    ovo_fit,
    rf_fit,
    rf_importance,
    sigmoid,
    svc_fit,
)
from bcsurv.classifiers.forest import ForestModel
from bcsurv.classifiers.svc import calibrate
from bcsurv.errors import DimensionMismatch, ModelError, SingleClassTraining
from bcsurv.tabular import FeatureMatrix
from oracles import central_difference, naive_knn_score


def fm(x, y):
    x = np.asarray(x, dtype=float)
    return FeatureMatrix(x.reshape(len(y), -1), np.asarray(y))


def accuracy_of(model, m):
    return float(np.mean(model.predict(m.values) == m.labels))


# --- logistic regression -------------------------------------------------


class TestSigmoid:
    def test_zero(self):
        assert sigmoid(0.0) == 0.5

    def test_symmetry(self, rng):
        z = rng.normal(scale=10, size=50)
        assert np.allclose(sigmoid(z) + sigmoid(-z), 1.0, atol=1e-15)

    def test_no_overflow(self):
        with np.errstate(over="raise"):
            assert sigmoid(500.0) == 1.0
            assert 0.0 < sigmoid(-500.0) < 1e-200


class TestLogisticLoss:
    def test_zero_theta_is_ln2(self, rng):
        m = fm(rng.random((30, 3)), rng.integers(0, 2, 30))
        assert lr_loss(np.zeros(4), m) == pytest.approx(math.log(2), abs=1e-12)

    def test_confident_correct_predictions(self):
        m = fm([[0.0], [1.0]], [0, 1])
        assert lr_loss([-40.0, 80.0], m) < 1e-12

    def test_matches_direct_sum(self):
        x = np.array([[0.1, 0.9], [0.4, 0.2], [0.8, 0.5], [0.3, 0.3], [0.6, 0.7], [0.9, 0.1]])
        y = np.array([0, 1, 1, 0, 1, 0])
        theta = [0.2, -1.5, 0.7]
        total = 0.0
        for row, label in zip(x, y):
            z = theta[0] + theta[1] * row[0] + theta[2] * row[1]
            p = 1 / (1 + math.exp(-z))
            total -= label * math.log(p) + (1 - label) * math.log(1 - p)
        assert lr_loss(theta, fm(x, y)) == pytest.approx(total / 6, rel=1e-13)

    def test_theta_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            lr_loss([0.0, 0.0], fm([[0, 1]], [1]))


def test_gradient_matches_finite_differences(rng):
    m = fm(rng.random((10, 4)), rng.integers(0, 2, 10))
    for _ in range(20):
        theta = rng.normal(size=5)
        g = lr_gradient(theta, m)
        fd = np.array(central_difference(lambda t: lr_loss(t, m), theta))
        assert np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12) < 1e-6


class TestLrFit:
    def test_separable_line(self):
        x = np.linspace(0, 1, 20)
        m = fm(x, (x > 0.5).astype(int))
        model = lr_fit(m)
        assert accuracy_of(model, m) == 1.0

    def test_duplicated_rows_same_theta(self, rng):
        x = rng.random((25, 2))
        y = (x[:, 0] > 0.5).astype(int)
        a = lr_fit(fm(x, y))
        b = lr_fit(fm(np.vstack([x, x]), np.concatenate([y, y])))
        assert np.allclose(a.theta, b.theta, atol=1e-10)

    def test_loss_decreases(self, planted):
        train, _ = planted
        model = lr_fit(train, LogisticConfig(max_iters=200))
        hist = model.training_loss_history
        assert hist[0] == pytest.approx(math.log(2))
        assert hist[-1] < hist[0]
        assert all(b <= a for a, b in zip(hist, hist[1:]))

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassTraining):
            lr_fit(fm([[0.0], [1.0]], [1, 1]))


# --- forests -------------------------------------------------------------


class TestForest:
    def test_single_tree_is_cart_on_bootstrap(self, rng):
        x = rng.random((50, 4))
        y = (x[:, 1] > 0.4).astype(int)
        m = fm(x, y)
        forest = rf_fit(m, T=1, seed=11)
        r = child_rng(11, 0)
        samples = r.integers(0, 50, size=50)
        tree = build_tree(samples, m, TreeConfig(feature_subset_size=2), r)
        assert forest.trees[0] == tree

    @pytest.mark.parametrize("fit", [rf_fit, et_fit])
    def test_worker_count_invariant(self, planted, fit):
        train, _ = planted
        a = fit(train, T=12, seed=3, jobs=1)
        b = fit(train, T=12, seed=3, jobs=4)
        assert a.trees == b.trees
        assert np.array_equal(a.importances, b.importances)

    def test_rf_planted_accuracy(self, planted):
        train, test = planted
        model = rf_fit(train, T=100, seed=0)
        assert accuracy_of(model, test) > 0.85
        assert model.importances.sum() == pytest.approx(1.0)

    def test_et_planted_accuracy(self, planted):
        train, test = planted
        model = et_fit(train, T=200, seed=0)
        assert accuracy_of(model, test) > 0.85

    def test_et_uses_full_sample(self, rng):
        m = fm(rng.random((30, 2)), rng.integers(0, 2, 30))
        model = et_fit(m, T=5, seed=0)
        for tree in model.trees:
            assert tree.n_samples == 30

    def test_zero_trees_rejected(self, rng):
        with pytest.raises(ModelError):
            rf_fit(fm(rng.random((4, 1)), [0, 1, 0, 1]), T=0)


class TestImportance:
    def test_one_hot_single_tree(self):
        tree = Split(2, 0.5, Leaf((3, 0)), Leaf((0, 3)), 0.5, 6)
        assert rf_importance([tree], 4).tolist() == [0, 0, 1, 0]

    def test_three_trees(self):
        # per-tree vectors [2/3, 1/3, 0], [0, 0, 1], [2/5, 0, 3/5]; mean = [16, 5, 24] / 45
        t1 = Split(0, 0.5, Split(1, 0.3, Leaf((2, 0)), Leaf((0, 2)), 0.25, 4), Leaf((6, 0)), 0.2, 10)
        t2 = Split(2, 0.5, Leaf((1, 0)), Leaf((0, 1)), 0.5, 2)
        t3 = Split(2, 0.5, Split(0, 0.5, Leaf((1, 0)), Leaf((0, 1)), 0.5, 2), Leaf((0, 2)), 0.375, 4)
        # t3: fi2 = 0.375, fi0 = 0.5 * 0.5 = 0.25 -> [0.4, 0, 0.6]
        got = rf_importance([t1, t2, t3], 3)
        assert got == pytest.approx([16 / 45, 5 / 45, 24 / 45], abs=1e-15)

    def test_leaf_only_trees_renormalized(self):
        tree = Split(0, 0.5, Leaf((1, 0)), Leaf((0, 1)), 0.5, 2)
        assert rf_importance([tree, Leaf((1, 1))], 2).tolist() == [1.0, 0.0]
        assert rf_importance([Leaf((1, 1))], 2).tolist() == [0.0, 0.0]


def test_forest_score_counts_votes():
    trees = (
        Split(0, 0.5, Leaf((1, 0)), Leaf((0, 1)), 0.5, 2),
        Split(0, 0.2, Leaf((1, 0)), Leaf((0, 1)), 0.5, 2),
        Leaf((3, 1)),
        Leaf((1, 1)),  # tie counts as a positive vote
    )
    model = ForestModel(trees, np.zeros(1), "bootstrap_rf", 0, 1, TreeConfig())
    assert forest_score(model, [0.3]) == 0.5
    assert forest_score(model, [0.9]) == 0.75
    assert forest_score(model, [0.1]) == 0.25


# --- k nearest neighbours -----------------------------------------------


class TestKnnDistance:
    def test_three_four_five(self):
        assert knn_distance([0, 0], [3, 4]) == 5.0

    def test_identity_and_symmetry(self, rng):
        a, b = rng.random(6), rng.random(6)
        assert knn_distance(a, a) == 0.0
        assert knn_distance(a, b) == knn_distance(b, a)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            knn_distance([0, 0], [0, 0, 0])


class TestKnn:
    def test_k1_recovers_training_labels(self, rng):
        x = rng.random((40, 3))
        y = rng.integers(0, 2, 40)
        model = knn_fit(fm(x, y), k=1)
        assert np.array_equal(model.predict(x), y)

    def test_k_equals_n_is_global_rate(self, rng):
        x = rng.random((15, 2))
        y = rng.integers(0, 2, 15)
        model = knn_fit(fm(x, y), k=15)
        assert np.allclose(model.score(rng.random((5, 2))), y.mean())

    def test_hand_case(self):
        x = [[0.0], [1.0], [2.0], [3.0], [10.0], [11.0]]
        y = [1, 1, 0, 0, 1, 0]
        model = knn_fit(fm(x, y), k=3)
        # neighbours of 1.4: 1.0, 2.0, 0.0
        assert knn_score(model, [1.4]) == pytest.approx(2 / 3)
        # 1.5 is equidistant from 1 and 2; order is 1, 2 then 0 (index tie-break on 0 vs 3)
        assert model.neighbors([1.5]).tolist() == [[1, 2, 0]]
        assert knn_score(model, [10.6]) == pytest.approx(1 / 3)

    def test_matches_naive_oracle(self, rng):
        # integer grid coordinates make distance ties frequent
        for _ in range(100):
            n = int(rng.integers(1, 51))
            p = int(rng.integers(1, 4))
            x = rng.integers(0, 4, size=(n, p)).astype(float)
            y = rng.integers(0, 2, n)
            q = rng.integers(0, 4, size=p).astype(float)
            for k in range(1, n + 1):
                model = KnnModel(x, y, k)
                assert knn_score(model, q) == pytest.approx(naive_knn_score(x, y, q, k), abs=1e-15)

    def test_bad_k(self):
        with pytest.raises(ModelError):
            knn_fit(fm([[0.0], [1.0]], [0, 1]), k=3)


# --- support-vector classifier -------------------------------------------


def separable_fixture():
    rng = np.random.default_rng(4)
    neg = rng.random((20, 2)) * 0.35
    pos = 0.65 + rng.random((20, 2)) * 0.35
    return fm(np.vstack([neg, pos]), np.array([0] * 20 + [1] * 20))


class TestSvc:
    def test_separable_reaches_margin(self):
        m = separable_fixture()
        model = svc_fit(m, SvcConfig(C=100.0, max_epochs=1000, learning_rate=2.0))
        assert accuracy_of(model, m) == 1.0
        t = np.where(m.labels == 1, 1.0, -1.0)
        assert (t * model.margin(m.values)).min() >= 1 - 1e-3

    def test_objective_decreases(self):
        m = separable_fixture()
        hist = svc_fit(m).objective_history
        assert hist[-1] < hist[0]

    def test_default_config_separates(self):
        m = separable_fixture()
        assert accuracy_of(svc_fit(m), m) == 1.0

    def test_calibration_endpoints(self):
        assert calibrate([-2.0, 0.0, 4.0], -2.0, 4.0).tolist() == [0.0, 0.5, 1.0]
        assert calibrate([1.0, 3.0, 5.0], 1.0, 5.0).tolist() == [0.0, 0.5, 1.0]
        # values outside the training range clip
        assert calibrate([-9.0, 9.0], -2.0, 4.0).tolist() == [0.0, 1.0]

    def test_calibration_monotone(self, rng):
        m = np.sort(rng.normal(size=200))
        out = calibrate(m, -1.0, 1.5)
        assert np.all(np.diff(out) >= 0)

    def test_bad_config(self):
        with pytest.raises(ModelError):
            SvcConfig(C=0)


class TestOneVsOne:
    @pytest.mark.parametrize("k,size", [(2, 1), (3, 3), (5, 10)])
    def test_ensemble_size(self, k, size):
        assert ovo_ensemble_size(k) == size

    def test_one_class_rejected(self):
        with pytest.raises(ModelError):
            ovo_ensemble_size(1)

    def test_three_clusters(self):
        centers = {"a": (0.1, 0.1), "b": (0.9, 0.1), "c": (0.5, 0.9)}
        rng = np.random.default_rng(2)
        xs, ts = [], []
        for name, c in centers.items():
            xs.append(np.asarray(c) + rng.normal(scale=0.04, size=(15, 2)))
            ts += [name] * 15
        x = np.vstack(xs)
        model = ovo_fit(x, ts, lambda m, s: svc_fit(m, seed=s))
        assert len(model.models) == 3
        assert model.predict(np.array(list(centers.values()))).tolist() == ["a", "b", "c"]


# --- shared contract ------------------------------------------------------

FAMILIES = ["lr", "et", "rf", "knn", "svc"]
SMALL = {"rf": {"n_trees": 10}, "et": {"n_trees": 10}, "knn": {"k": 3}, "svc": {"max_epochs": 10}, "lr": {"max_iters": 200}}


@pytest.mark.parametrize("name", FAMILIES)
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**16), n=st.integers(6, 30), p=st.integers(1, 4))
def test_scores_lie_in_unit_interval(name, seed, n, p):
    r = np.random.default_rng(seed)
    y = r.integers(0, 2, n)
    y[:2] = [0, 1]
    m = fm(r.random((n, p)), y)
    model = fit_model(name, m, seed=seed, overrides=SMALL[name])
    q = r.random((7, p)) * 2 - 0.5
    s = model.score(q)
    assert s.shape == (7,)
    assert np.all((s >= 0) & (s <= 1))
    assert np.array_equal(model.predict(q), (s >= 0.5).astype(int))


@pytest.mark.parametrize("name", FAMILIES)
def test_every_family_beats_majority(planted, name):
    train, test = planted
    majority = max(test.labels.mean(), 1 - test.labels.mean())
    model = fit_model(name, train, seed=0)
    assert accuracy_of(model, test) > majority


@pytest.mark.parametrize("name", FAMILIES)
def test_dimension_mismatch_on_score(planted, name):
    train, _ = planted
    model = fit_model(name, train, seed=0, overrides=SMALL[name])
    with pytest.raises(DimensionMismatch):
        model.score(np.zeros((2, train.p + 1)))
