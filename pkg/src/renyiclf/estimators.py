"""scikit-learn style estimators wrapping the library.

RenyiClassifier exposes the randomized-regression classifier through the
usual fit / predict / predict_proba surface; RenyiFeatureSelector exposes the
block group lasso through fit / transform.  Both accept raw categorical
matrices (strings, ints, mixed) and handle the indicator encoding
internally, so they compose with pipelines and model selection tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .classifier import (
    predict_labels,
    prediction_from_score,
    train_model,
    _score_rows,
)
from .errors import IndexOutOfAlphabet
from .feature_selection import AdmmOptions, select_saa
from .schema import Dataset, expand_pairs
from .validation import (
    check_binary_target,
    check_feature_matrix,
    rows_from_strings,
    schema_from_strings,
)


class RenyiClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier for categorical features trained from pairwise
    statistics via a regularized least-squares surrogate.

    Parameters
    ----------
    ridge_lambda : ridge penalty on the indicator coefficients.
    smoothing_alpha : optional additive smoothing of the marginal tables.
    pair_expansion : replace features with all unordered pairs before
        training, lifting the model to higher-order marginals.
    clip_epsilon : floor/ceiling applied to the pseudo-posteriors.
    decision : "map" for the deterministic sign rule or "randomized" for the
        squared-weight randomized rule.
    random_state : base seed for the randomized decision rule.
    strict : reject categories unseen during fit instead of scoring them 0.
    """

    def __init__(self, ridge_lambda=0.0, smoothing_alpha=0.0,
                 pair_expansion=False, clip_epsilon=0.0, decision="map",
                 random_state=0, strict=False):
        self.ridge_lambda = ridge_lambda
        self.smoothing_alpha = smoothing_alpha
        self.pair_expansion = pair_expansion
        self.clip_epsilon = clip_epsilon
        self.decision = decision
        self.random_state = random_state
        self.strict = strict

    def fit(self, X, y):
        X = check_feature_matrix(X)
        labels, classes = check_binary_target(y)
        if X.shape[0] != labels.size:
            raise ValueError(f"X has {X.shape[0]} rows but y has {labels.size}")
        schema = schema_from_strings(X)
        data = Dataset(schema=schema, rows=rows_from_strings(X, schema), labels=labels)
        if self.pair_expansion and schema.n_features >= 2:
            data = expand_pairs(data)
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        self.input_schema_ = schema
        self.model_ = train_model(
            data,
            ridge_lambda=self.ridge_lambda,
            smoothing_alpha=self.smoothing_alpha,
            clip_epsilon=self.clip_epsilon,
        )
        self.gamma_ = self.model_.gamma
        self.separable_ = self.model_.separable
        self.error_upper_bound_ = self.model_.error_upper_bound()
        return self

    def _model_rows(self, X):
        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}")
        rows = rows_from_strings(X, self.input_schema_)
        if self.strict and np.any(rows == 0):
            r, f = np.argwhere(rows == 0)[0]
            raise IndexOutOfAlphabet(
                f"row {r}: feature {self.input_schema_.names[f]!r} has an unseen category"
            )
        if self.pair_expansion and self.input_schema_.n_features >= 2:
            rows = self._expand_rows(rows)
        return rows

    def _expand_rows(self, rows):
        cards = self.input_schema_.cardinalities
        d = len(cards)
        pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
        out = np.zeros((rows.shape[0], len(pairs)), dtype=np.int64)
        for t, (i, j) in enumerate(pairs):
            known = (rows[:, i] > 0) & (rows[:, j] > 0)
            out[:, t] = np.where(known, (rows[:, i] - 1) * cards[j] + rows[:, j], 0)
        return out

    def decision_function(self, X):
        """Additive score s(x); positive means the second class."""
        rows = self._model_rows(X)
        return _score_rows(self.model_, rows, strict=False)

    def predict_proba(self, X):
        scores = self.decision_function(X)
        eps = self.clip_epsilon
        p1 = np.clip(0.5 + scores, eps, 1.0 - eps)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        rows = self._model_rows(X)
        mode = "map" if self.decision == "map" else "randomized-sampled"
        labels = predict_labels(self.model_, rows, mode=mode,
                                seed=int(self.random_state))
        return self.classes_[labels]

    def randomized_weights(self, X):
        """Probability of predicting the first class under the randomized rule."""
        scores = self.decision_function(X)
        return np.array([
            prediction_from_score(s, self.model_.q0, self.clip_epsilon).prob_predict_0
            for s in scores
        ])


class RenyiFeatureSelector(TransformerMixin, BaseEstimator):
    """Group-lasso feature selector over indicator blocks.

    fit runs the ADMM solve on the empirical marginals; transform keeps the
    selected original columns.  top_k optionally truncates the selection to
    the k largest block norms.
    """

    def __init__(self, reg_lambda=0.1, rho=1.0, tol_abs=1e-6, tol_rel=1e-4,
                 max_iter=10_000, top_k=None):
        self.reg_lambda = reg_lambda
        self.rho = rho
        self.tol_abs = tol_abs
        self.tol_rel = tol_rel
        self.max_iter = max_iter
        self.top_k = top_k

    def fit(self, X, y):
        X = check_feature_matrix(X)
        labels, classes = check_binary_target(y)
        if X.shape[0] != labels.size:
            raise ValueError(f"X has {X.shape[0]} rows but y has {labels.size}")
        schema = schema_from_strings(X)
        data = Dataset(schema=schema, rows=rows_from_strings(X, schema), labels=labels)
        opts = AdmmOptions(rho=self.rho, tol_abs=self.tol_abs,
                           tol_rel=self.tol_rel, max_iter=self.max_iter)
        result = select_saa(data, self.reg_lambda, opts)
        selected = list(result.selected)
        if self.top_k is not None and len(selected) > self.top_k:
            order = np.argsort(result.block_norms[selected])[::-1]
            selected = sorted(np.asarray(selected)[order[: self.top_k]].tolist())
        self.n_features_in_ = X.shape[1]
        self.classes_ = classes
        self.selection_ = result
        self.block_norms_ = result.block_norms
        self.support_ = np.zeros(X.shape[1], dtype=bool)
        self.support_[selected] = True
        return self

    def get_support(self, indices=False):
        return np.flatnonzero(self.support_) if indices else self.support_.copy()

    def transform(self, X):
        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit saw {self.n_features_in_}")
        return X[:, self.support_]
