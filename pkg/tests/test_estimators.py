import numpy as np
import pytest
from sklearn.base import clone

import renyiclf as rc
from renyiclf.errors import IndexOutOfAlphabet, NonBinaryLabel


@pytest.fixture
def toy_xy():
    rng = np.random.default_rng(0)
    n = 200
    x1 = rng.choice(["a", "b"], size=n)
    x2 = rng.choice(["u", "v", "w"], size=n)
    noise = rng.random(n) < 0.1
    y = np.where((x1 == "a") ^ noise, "yes", "no")
    X = np.column_stack([x1, x2])
    return X, y


class TestRenyiClassifier:
    def test_fit_predict_recovers_signal(self, toy_xy):
        X, y = toy_xy
        clf = rc.RenyiClassifier().fit(X, y)
        acc = (clf.predict(X) == y).mean()
        assert acc >= 0.85
        assert set(clf.classes_) == {"yes", "no"}
        assert clf.gamma_ <= 0.25

    def test_predict_proba_shape_and_sum(self, toy_xy):
        X, y = toy_xy
        clf = rc.RenyiClassifier().fit(X, y)
        proba = clf.predict_proba(X)
        assert proba.shape == (len(y), 2)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0)
        assert proba.min() >= 0.0

    def test_get_params_and_clone(self):
        clf = rc.RenyiClassifier(ridge_lambda=0.5, pair_expansion=True)
        params = clf.get_params()
        assert params["ridge_lambda"] == 0.5
        assert params["pair_expansion"] is True
        cloned = clone(clf)
        assert cloned.get_params() == params

    def test_sklearn_score(self, toy_xy):
        X, y = toy_xy
        assert rc.RenyiClassifier().fit(X, y).score(X, y) >= 0.85

    def test_randomized_decision_reproducible(self, toy_xy):
        X, y = toy_xy
        clf = rc.RenyiClassifier(decision="randomized", random_state=11).fit(X, y)
        np.testing.assert_array_equal(clf.predict(X), clf.predict(X))

    def test_strict_unseen_category(self, toy_xy):
        X, y = toy_xy
        clf = rc.RenyiClassifier(strict=True).fit(X, y)
        X_new = X.copy()
        X_new[0, 0] = "zebra"
        with pytest.raises(IndexOutOfAlphabet):
            clf.predict(X_new)

    def test_permissive_unseen_category(self, toy_xy):
        X, y = toy_xy
        clf = rc.RenyiClassifier(strict=False).fit(X, y)
        X_new = X.copy()
        X_new[:, 0] = "zebra"
        preds = clf.predict(X_new)
        assert set(preds) <= set(clf.classes_)

    def test_pair_expansion_trains(self, toy_xy):
        X, y = toy_xy
        clf = rc.RenyiClassifier(pair_expansion=True).fit(X, y)
        assert clf.model_.schema.n_features == 1  # one pair from two features
        assert (clf.predict(X) == y).mean() >= 0.85

    def test_non_binary_target_rejected(self):
        X = np.array([["a"], ["b"], ["c"]])
        with pytest.raises(NonBinaryLabel):
            rc.RenyiClassifier().fit(X, ["u", "v", "w"])

    def test_integer_features_and_labels(self):
        rng = np.random.default_rng(5)
        X = rng.integers(0, 3, size=(150, 2))
        y = (X[:, 0] == 1).astype(int)
        clf = rc.RenyiClassifier().fit(X, y)
        assert (clf.predict(X) == y).mean() == 1.0
        assert list(clf.classes_) == [0, 1]


class TestRenyiFeatureSelector:
    def test_selects_informative_feature(self, toy_xy):
        X, y = toy_xy
        sel = rc.RenyiFeatureSelector(reg_lambda=0.05).fit(X, y)
        assert sel.support_[0]
        assert not sel.support_[1]
        out = sel.transform(X)
        assert out.shape == (len(y), 1)

    def test_huge_lambda_selects_nothing(self, toy_xy):
        X, y = toy_xy
        sel = rc.RenyiFeatureSelector(reg_lambda=50.0).fit(X, y)
        assert not sel.support_.any()
        assert sel.transform(X).shape == (len(y), 0)

    def test_top_k_truncation(self, toy_xy):
        X, y = toy_xy
        sel = rc.RenyiFeatureSelector(reg_lambda=1e-8, top_k=1).fit(X, y)
        assert sel.support_.sum() == 1
        assert sel.get_support(indices=True).tolist() == [0]

    def test_clone_and_params(self):
        sel = rc.RenyiFeatureSelector(reg_lambda=0.3, top_k=2)
        assert clone(sel).get_params()["reg_lambda"] == 0.3
