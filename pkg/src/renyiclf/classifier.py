"""Linear conditional-probability model and its decision rules.

A trained model carries the coefficient vector z from the least-squares
surrogate.  The additive score s(x) = sum_i z[offset_i + x_i - 1] yields
pseudo-posteriors p1 = 1/2 + s(x) and p0 = 1 - p1 (clamped when the
separability guarantee does not hold), the deterministic sign rule, and the
randomized rule that predicts 0 with probability p0^2 / (p0^2 + p1^2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .core import solve_population, solve_saa
from .errors import (
    CorruptModel,
    EmptyDataset,
    FormatVersionMismatch,
    IndexOutOfAlphabet,
)
from .marginals import estimate
from .schema import CategoricalSchema, Dataset

MODEL_FORMAT_VERSION = "1"
_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RenyiModel:
    schema: CategoricalSchema
    z: np.ndarray
    ridge_lambda: float
    gamma: float
    separable: bool
    h_plus: float
    h_minus: float
    q0: float
    train_n: int
    smoothing_alpha: float = 0.0
    clip_epsilon: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).ravel()
        if z.size != self.schema.total_width:
            raise ValueError(f"z has {z.size} entries, schema width {self.schema.total_width}")
        object.__setattr__(self, "z", z)

    def error_upper_bound(self) -> float:
        """Certified worst-case error 2 * gamma of the randomized rule over
        every joint matching the training marginals.  The additional factor-2
        optimality guarantee only applies when separable is true."""
        return 2.0 * self.gamma


@dataclass(frozen=True)
class Prediction:
    score: float
    p0: float
    p1: float
    map_label: int
    prob_predict_0: float


def train_model(data: Dataset, ridge_lambda: float = 0.0,
                smoothing_alpha: float = 0.0,
                clip_epsilon: float = 0.0) -> RenyiModel:
    """Fit the least-squares surrogate on a dataset.

    Without smoothing this is the direct empirical solve; with smoothing the
    marginals are smoothed first and the population solve runs on them.
    """
    if smoothing_alpha > 0.0:
        marg = estimate(data, smoothing_alpha=smoothing_alpha)
        sol = solve_population(marg, ridge_lambda)
        q0 = marg.q0
    else:
        sol = solve_saa(data, ridge_lambda)
        q0 = float(np.mean(data.labels == 0))
    return RenyiModel(
        schema=data.schema,
        z=sol.z,
        ridge_lambda=ridge_lambda,
        gamma=sol.gamma,
        separable=sol.separable,
        h_plus=sol.h_plus,
        h_minus=sol.h_minus,
        q0=q0,
        train_n=data.n,
        smoothing_alpha=smoothing_alpha,
        clip_epsilon=clip_epsilon,
    )


def prediction_from_score(score: float, q0: float = 0.5,
                          clip_epsilon: float = 0.0) -> Prediction:
    """Turn an additive score into clamped pseudo-posteriors and rule weights.

    p1 = 1/2 + score clamped into [clip_epsilon, 1 - clip_epsilon] and
    p0 = 1 - p1, so the pair stays a distribution even when the linear form
    leaves [0, 1].  Ties of the sign rule go to the larger class prior, then
    to label 0.
    """
    eps = float(clip_epsilon)
    p1 = min(1.0 - eps, max(eps, 0.5 + score))
    p0 = 1.0 - p1
    if score > _TIE_TOL:
        map_label = 1
    elif score < -_TIE_TOL:
        map_label = 0
    else:
        map_label = 1 if (1.0 - q0) > q0 else 0
    denom = p0 * p0 + p1 * p1
    prob0 = p0 * p0 / denom if denom > 0.0 else 0.5
    return Prediction(score=float(score), p0=p0, p1=p1, map_label=map_label,
                      prob_predict_0=prob0)


def _score_rows(model: RenyiModel, rows: np.ndarray, strict: bool) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    schema = model.schema
    cards = np.asarray(schema.cardinalities, dtype=np.int64)
    if rows.shape[1] != schema.n_features:
        raise IndexOutOfAlphabet(
            f"rows have {rows.shape[1]} features, schema has {schema.n_features}"
        )
    if np.any(rows > cards[None, :]) or np.any(rows < 0):
        r, f = np.argwhere((rows > cards[None, :]) | (rows < 0))[0]
        raise IndexOutOfAlphabet(
            f"row {r}: feature {schema.names[f]!r} index {rows[r, f]} outside 1..{cards[f]}"
        )
    if np.any(rows == 0):
        if strict:
            r, f = np.argwhere(rows == 0)[0]
            raise IndexOutOfAlphabet(
                f"row {r}: feature {schema.names[f]!r} has a category unseen in training"
            )
    offsets = np.asarray(schema.offsets, dtype=np.int64)
    cols = offsets[None, :] + rows - 1
    seen = rows > 0
    padded = np.concatenate([model.z, [0.0]])
    cols = np.where(seen, cols, len(model.z))
    return padded[cols].sum(axis=1)


def predict_conditional(model: RenyiModel, row, strict: bool = True) -> Prediction:
    """Score one row and wrap it as a Prediction.  In permissive mode an
    unseen category (index 0) contributes no evidence."""
    score = float(_score_rows(model, np.asarray(row, dtype=np.int64)[None, :], strict)[0])
    return prediction_from_score(score, q0=model.q0, clip_epsilon=model.clip_epsilon)


def decide_map(model: RenyiModel, row, strict: bool = True) -> int:
    return predict_conditional(model, row, strict=strict).map_label


def decide_randomized(model: RenyiModel, row, rng_seed: int, row_index: int,
                      strict: bool = True) -> int:
    """Sampled label; the draw is a pure function of (rng_seed, row_index)
    through a counter-based generator, so results do not depend on evaluation
    order or thread count."""
    pred = predict_conditional(model, row, strict=strict)
    u = _row_uniform(rng_seed, row_index)
    return 0 if u < pred.prob_predict_0 else 1


def _row_uniform(rng_seed: int, row_index: int) -> float:
    bits = np.random.Philox(key=int(rng_seed) & (2 ** 64 - 1),
                            counter=int(row_index))
    return float(np.random.Generator(bits).random())


@dataclass(frozen=True)
class EvaluationResult:
    error_rate: float
    per_class: tuple[float, float]   # (error on true label 0, on true label 1)


EVAL_MODES = ("map", "randomized-analytic", "randomized-sampled")


def evaluate(model: RenyiModel, data: Dataset, mode: str = "map",
             seed: int = 0, strict: bool = False) -> EvaluationResult:
    """Misclassification rate of the chosen rule on a dataset.

    map counts sign-rule mistakes; randomized-analytic is the exact expected
    error of the randomized rule; randomized-sampled draws one label per row
    under the per-row seeding contract.
    """
    if data.n == 0:
        raise EmptyDataset("cannot evaluate on an empty dataset")
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}, got {mode!r}")
    scores = _score_rows(model, data.rows, strict)
    labels = data.labels
    if mode == "map":
        preds = np.array([prediction_from_score(s, model.q0, model.clip_epsilon).map_label
                          for s in scores])
        wrong = (preds != labels).astype(float)
    elif mode == "randomized-analytic":
        q0x = np.array([prediction_from_score(s, model.q0, model.clip_epsilon).prob_predict_0
                        for s in scores])
        wrong = np.where(labels == 1, q0x, 1.0 - q0x)
    else:
        preds = np.array([
            0 if _row_uniform(seed, i) < prediction_from_score(
                s, model.q0, model.clip_epsilon).prob_predict_0 else 1
            for i, s in enumerate(scores)
        ])
        wrong = (preds != labels).astype(float)

    def class_error(y):
        mask = labels == y
        return float(wrong[mask].mean()) if mask.any() else 0.0

    return EvaluationResult(error_rate=float(wrong.mean()),
                            per_class=(class_error(0), class_error(1)))


def predict_labels(model: RenyiModel, rows, mode: str = "map", seed: int = 0,
                   strict: bool = False) -> np.ndarray:
    """Vectorized labels for a block of rows (used by the CLI and estimator)."""
    scores = _score_rows(model, rows, strict)
    if mode == "map":
        return np.array([prediction_from_score(s, model.q0, model.clip_epsilon).map_label
                         for s in scores], dtype=np.int64)
    if mode == "randomized-sampled":
        return np.array([
            0 if _row_uniform(seed, i) < prediction_from_score(
                s, model.q0, model.clip_epsilon).prob_predict_0 else 1
            for i, s in enumerate(scores)
        ], dtype=np.int64)
    raise ValueError(f"prediction mode must be map or randomized-sampled, got {mode!r}")


def save_model(model: RenyiModel, path) -> None:
    """Versioned JSON model file; floats survive the round trip exactly."""
    payload = {
        "version": MODEL_FORMAT_VERSION,
        "schema": {
            "features": [
                {"name": name, "categories": list(cats)}
                for name, cats in model.schema.features
            ]
        },
        "z": [float(v) for v in model.z],
        "ridge_lambda": model.ridge_lambda,
        "gamma": model.gamma,
        "h_plus": model.h_plus,
        "h_minus": model.h_minus,
        "separable": bool(model.separable),
        "q0": model.q0,
        "train_n": int(model.train_n),
        "smoothing_alpha": model.smoothing_alpha,
        "clip_epsilon": model.clip_epsilon,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model(path) -> RenyiModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"{path}: not a valid model file ({exc})") from exc
    if not isinstance(payload, dict) or "version" not in payload:
        raise CorruptModel(f"{path}: missing version field")
    if payload["version"] != MODEL_FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"{path}: format version {payload['version']!r}, expected {MODEL_FORMAT_VERSION!r}"
        )
    try:
        schema = CategoricalSchema(tuple(
            (feat["name"], tuple(feat["categories"]))
            for feat in payload["schema"]["features"]
        ))
        return RenyiModel(
            schema=schema,
            z=np.asarray(payload["z"], dtype=float),
            ridge_lambda=float(payload["ridge_lambda"]),
            gamma=float(payload["gamma"]),
            separable=bool(payload["separable"]),
            h_plus=float(payload["h_plus"]),
            h_minus=float(payload["h_minus"]),
            q0=float(payload["q0"]),
            train_n=int(payload["train_n"]),
            smoothing_alpha=float(payload["smoothing_alpha"]),
            clip_epsilon=float(payload.get("clip_epsilon", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"{path}: malformed model payload ({exc})") from exc
