"""Input validation helpers for the estimator layer.

Feature matrices are categorical: any dtype is accepted and values are
compared as strings, which keeps '1' and 1 from silently becoming different
categories across fit and predict.
"""

from __future__ import annotations

import numpy as np

from .errors import NonBinaryLabel
from .schema import CategoricalSchema


def check_feature_matrix(X) -> np.ndarray:
    """Coerce X to a 2-d array of category strings."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"X must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"X must be non-empty, got shape {arr.shape}")
    return arr.astype(str)


def check_binary_target(y):
    """Validate a two-class target; returns (0/1 labels, sorted class array).

    The class that sorts first maps to label 0, mirroring the CSV ingestion
    rule, and np.unique keeps the estimator's classes_ attribute sorted.
    """
    y = np.asarray(y).ravel()
    classes = np.unique(y)
    if classes.size != 2:
        raise NonBinaryLabel(f"expected exactly two classes, found {classes.size}")
    labels = np.array([int(np.flatnonzero(classes == v)[0]) for v in y], dtype=np.int64)
    return labels, classes


def schema_from_strings(X: np.ndarray, feature_names=None) -> CategoricalSchema:
    """First-seen-order schema over a string feature matrix."""
    n, d = X.shape
    feats = []
    for j in range(d):
        seen: dict[str, None] = {}
        for v in X[:, j]:
            if v not in seen:
                seen[v] = None
        name = feature_names[j] if feature_names is not None else f"x{j + 1}"
        feats.append((name, tuple(seen.keys())))
    return CategoricalSchema(tuple(feats))


def rows_from_strings(X: np.ndarray, schema: CategoricalSchema) -> np.ndarray:
    """Map string values to 1-based category indices (0 where unseen)."""
    n, d = X.shape
    rows = np.zeros((n, d), dtype=np.int64)
    for j in range(d):
        lookup = {v: k + 1 for k, v in enumerate(schema.features[j][1])}
        rows[:, j] = [lookup.get(v, 0) for v in X[:, j]]
    return rows
