"""Synthetic wide-data benchmark: many i.i.d. Bernoulli features, a sparse
Gaussian linear teacher, and far fewer samples than indicator columns, so
training exercises the n-square Gram path of the ridge solve.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifier import predict_labels, train_model
from .schema import CategoricalSchema, Dataset


@dataclass(frozen=True)
class ExperimentResult:
    errors: np.ndarray
    train_seconds: np.ndarray

    @property
    def mean_error(self) -> float:
        return float(self.errors.mean())

    @property
    def mean_train_seconds(self) -> float:
        return float(self.train_seconds.mean())


def _binary_schema(d: int) -> CategoricalSchema:
    return CategoricalSchema.from_cardinalities([2] * d)


def run_single(seed: int, d: int = 10_000, n: int = 200, bern: float = 0.7,
               nonzero_frac: float = 0.3, ridge: float = 1e4,
               train_frac: float = 0.85, schema: CategoricalSchema | None = None):
    """One draw of the synthetic task; returns (map test error, train seconds).

    Features are Bernoulli(bern) in {0, 1}; the target is the sign of a
    sparse standard-normal linear form plus unit Gaussian noise, with the
    zero-probability tie mapped to label 1.
    """
    rng = np.random.default_rng(seed)
    X = (rng.random((n, d)) < bern).astype(np.int64)
    alpha = np.zeros(d)
    support = rng.random(d) < nonzero_frac
    alpha[support] = rng.standard_normal(int(support.sum()))
    noise = rng.standard_normal(n)
    y = (X @ alpha + noise >= 0.0).astype(np.int64)
    n_train = int(np.floor(train_frac * n))
    schema = schema or _binary_schema(d)
    train = Dataset(schema=schema, rows=X[:n_train] + 1, labels=y[:n_train])
    t0 = time.perf_counter()
    model = train_model(train, ridge_lambda=ridge)
    seconds = time.perf_counter() - t0
    preds = predict_labels(model, X[n_train:] + 1, mode="map")
    error = float(np.mean(preds != y[n_train:]))
    return error, seconds


def run_synthetic(seed: int = 0, d: int = 10_000, n: int = 200, bern: float = 0.7,
                  nonzero_frac: float = 0.3, ridge: float = 1e4, runs: int = 1000,
                  train_frac: float = 0.85, workers: int | None = None) -> ExperimentResult:
    """Monte-Carlo repetition of run_single with per-run seeds seed + i, so
    results are identical regardless of worker scheduling.  Worker count
    defaults to the RENYI_THREADS environment variable (1 when unset)."""
    if workers is None:
        workers = int(os.environ.get("RENYI_THREADS", "1"))
    schema = _binary_schema(d)
    seeds = [seed + i for i in range(runs)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(
                lambda s: run_single(s, d=d, n=n, bern=bern, nonzero_frac=nonzero_frac,
                                     ridge=ridge, train_frac=train_frac, schema=schema),
                seeds,
            ))
    else:
        outcomes = [run_single(s, d=d, n=n, bern=bern, nonzero_frac=nonzero_frac,
                               ridge=ridge, train_frac=train_frac, schema=schema)
                    for s in seeds]
    errors = np.array([e for e, _ in outcomes])
    seconds = np.array([t for _, t in outcomes])
    return ExperimentResult(errors=errors, train_seconds=seconds)
