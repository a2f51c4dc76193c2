"""Categorical schemas, datasets, and indicator encoding.

A schema assigns each feature an ordered alphabet of category strings.  A row
is stored as 1-based category indices per feature; index 0 is reserved for
"category unseen during training" and is only legal in permissive mode.
Encoded rows are one-hot-per-feature-block indicator vectors paired with a
signed label c in {-1/2, +1/2}.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicatePair,
    EmptyDataset,
    IndexOutOfAlphabet,
    MissingLabelColumn,
    NonBinaryLabel,
    RaggedRow,
    SelfPair,
    UnknownCategory,
)


@dataclass(frozen=True)
class CategoricalSchema:
    """Ordered feature alphabets plus block offsets into the indicator space.

    features: tuple of (name, categories) with categories an ordered tuple of
    distinct strings.  offsets[i] is the first indicator column of feature i;
    total_width is the full indicator dimension.
    """

    features: tuple[tuple[str, tuple[str, ...]], ...]
    offsets: tuple[int, ...] = field(init=False)
    total_width: int = field(init=False)

    def __post_init__(self):
        if not self.features:
            raise ValueError("schema needs at least one feature")
        names = [name for name, _ in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        offsets = []
        width = 0
        for name, cats in self.features:
            if len(cats) == 0:
                raise ValueError(f"feature {name!r} has an empty alphabet")
            if len(set(cats)) != len(cats):
                raise ValueError(f"feature {name!r} has duplicate categories")
            offsets.append(width)
            width += len(cats)
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "total_width", width)

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(len(cats) for _, cats in self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.features)

    def block(self, i: int) -> slice:
        """Indicator-column slice of feature i."""
        lo = self.offsets[i]
        return slice(lo, lo + len(self.features[i][1]))

    def category_index(self, i: int, value: str) -> int:
        """1-based index of a category value within feature i, 0 if unseen."""
        try:
            return self.features[i][1].index(value) + 1
        except ValueError:
            return 0

    def n_configurations(self) -> int:
        n = 1
        for m in self.cardinalities:
            n *= m
        return n

    @staticmethod
    def from_cardinalities(cards, names=None) -> "CategoricalSchema":
        """Synthetic schema with categories named "1".."m" per feature."""
        feats = []
        for i, m in enumerate(cards):
            name = names[i] if names is not None else f"x{i + 1}"
            feats.append((name, tuple(str(k) for k in range(1, int(m) + 1))))
        return CategoricalSchema(tuple(feats))


def _check_rows(schema, rows, permissive):
    cards = np.asarray(schema.cardinalities, dtype=np.int64)
    low = 0 if permissive else 1
    if np.any(rows < low) or np.any(rows > cards[None, :]):
        bad = np.argwhere((rows < low) | (rows > cards[None, :]))[0]
        r, f = int(bad[0]), int(bad[1])
        raise IndexOutOfAlphabet(
            f"row {r}: feature {schema.names[f]!r} has index {rows[r, f]}, "
            f"alphabet size {cards[f]}"
        )


@dataclass(frozen=True)
class Dataset:
    """Rows of 1-based category indices with binary labels in {0, 1}.

    permissive=True additionally allows index 0, marking a category that was
    absent from the training alphabet.
    """

    schema: CategoricalSchema
    rows: np.ndarray
    labels: np.ndarray
    permissive: bool = False

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.int64))
        labels = np.asarray(self.labels, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != self.schema.n_features:
            raise RaggedRow(
                f"rows have shape {rows.shape}, expected (n, {self.schema.n_features})"
            )
        if rows.shape[0] == 0:
            raise EmptyDataset("dataset has no rows")
        if labels.shape != (rows.shape[0],):
            raise RaggedRow("rows and labels have different lengths")
        if np.any((labels != 0) & (labels != 1)):
            raise NonBinaryLabel("labels must be 0 or 1")
        _check_rows(self.schema, rows, self.permissive)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class IndicatorRow:
    """One-hot indicator vector w with signed label c in {-1/2, +1/2}."""

    w: np.ndarray
    c: float


def encode_row(schema: CategoricalSchema, row, label: int) -> IndicatorRow:
    """Encode one row: w[offsets[i] + x_i - 1] = 1, c = label - 1/2."""
    row = np.asarray(row, dtype=np.int64)
    if row.shape != (schema.n_features,):
        raise RaggedRow(f"row has {row.size} entries, schema has {schema.n_features}")
    cards = schema.cardinalities
    w = np.zeros(schema.total_width)
    for i, x in enumerate(row):
        if not 1 <= x <= cards[i]:
            raise IndexOutOfAlphabet(
                f"feature {schema.names[i]!r}: index {x} outside 1..{cards[i]}"
            )
        w[schema.offsets[i] + x - 1] = 1.0
    if label not in (0, 1):
        raise NonBinaryLabel(f"label {label!r} is not binary")
    return IndicatorRow(w=w, c=label - 0.5)


class InvalidIndicator(RaggedRow):
    pass


def decode_row(schema: CategoricalSchema, ind: IndicatorRow):
    """Inverse of encode_row; returns (row indices, label)."""
    row = np.empty(schema.n_features, dtype=np.int64)
    for i in range(schema.n_features):
        block = ind.w[schema.block(i)]
        hot = np.flatnonzero(block == 1.0)
        if hot.size != 1 or not np.all((block == 0.0) | (block == 1.0)):
            raise InvalidIndicator(f"feature block {i} is not one-hot")
        row[i] = hot[0] + 1
    return row, int(ind.c + 0.5 > 0)


def indicator_matrix(schema: CategoricalSchema, rows: np.ndarray) -> np.ndarray:
    """Stack encode_row over all rows.  Permissive index 0 yields an all-zero
    block (no evidence from that feature)."""
    rows = np.asarray(rows, dtype=np.int64)
    n = rows.shape[0]
    W = np.zeros((n, schema.total_width))
    offsets = np.asarray(schema.offsets, dtype=np.int64)
    cols = offsets[None, :] + rows - 1
    seen = rows > 0
    r_idx, f_idx = np.nonzero(seen)
    W[r_idx, cols[r_idx, f_idx]] = 1.0
    return W


def signed_labels(labels: np.ndarray) -> np.ndarray:
    return np.asarray(labels, dtype=float) - 0.5


def _map_labels(values: list[str]):
    distinct = sorted(set(values))
    if set(distinct) <= {"0", "1"}:
        mapping = {"0": 0, "1": 1}
    elif len(distinct) == 2:
        mapping = {distinct[0]: 0, distinct[1]: 1}
    else:
        raise NonBinaryLabel(
            f"expected two distinct label values, found {len(distinct)}: {distinct[:5]}"
        )
    return np.array([mapping[v] for v in values], dtype=np.int64), mapping


def _read_table(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: empty file") from None
        table = list(reader)
    return header, table


def ingest_csv(path, label_column: str, schema_hint: CategoricalSchema | None = None,
               permissive: bool = False) -> Dataset:
    """Read a header-first CSV into a Dataset.

    Categories are interned in first-seen order unless a schema_hint pins the
    alphabets.  The label value that sorts first lexicographically maps to 0
    (literal "0"/"1" map to themselves).  Cells must be non-empty.
    """
    header, table = _read_table(path)
    if label_column not in header:
        raise MissingLabelColumn(f"{path}: no column named {label_column!r}")
    label_pos = header.index(label_column)
    feature_names = [h for h in header if h != label_column]
    if not table:
        raise EmptyDataset(f"{path}: no data rows")

    for r, cells in enumerate(table):
        if len(cells) != len(header):
            raise RaggedRow(f"{path}: row {r + 1} has {len(cells)} cells, expected {len(header)}")
        if any(c == "" for c in cells):
            raise RaggedRow(f"{path}: row {r + 1} has a missing cell")

    label_values = [cells[label_pos] for cells in table]
    labels, _ = _map_labels(label_values)

    feat_pos = [header.index(f) for f in feature_names]
    if schema_hint is not None:
        if schema_hint.names != tuple(feature_names):
            raise UnknownCategory(
                f"{path}: columns {feature_names} do not match schema {list(schema_hint.names)}"
            )
        schema = schema_hint
        rows = np.zeros((len(table), len(feature_names)), dtype=np.int64)
        for r, cells in enumerate(table):
            for j, pos in enumerate(feat_pos):
                idx = schema.category_index(j, cells[pos])
                if idx == 0 and not permissive:
                    raise UnknownCategory(
                        f"{path}: row {r + 1}, feature {feature_names[j]!r}: "
                        f"unknown category {cells[pos]!r}"
                    )
                rows[r, j] = idx
        return Dataset(schema=schema, rows=rows, labels=labels, permissive=permissive)

    alphabets: list[list[str]] = [[] for _ in feature_names]
    seen: list[dict] = [{} for _ in feature_names]
    rows = np.zeros((len(table), len(feature_names)), dtype=np.int64)
    for r, cells in enumerate(table):
        for j, pos in enumerate(feat_pos):
            v = cells[pos]
            idx = seen[j].get(v)
            if idx is None:
                alphabets[j].append(v)
                idx = len(alphabets[j])
                seen[j][v] = idx
            rows[r, j] = idx
    schema = CategoricalSchema(
        tuple((name, tuple(cats)) for name, cats in zip(feature_names, alphabets))
    )
    return Dataset(schema=schema, rows=rows, labels=labels)


def expand_pairs(data: Dataset, pairs=None) -> Dataset:
    """Replace features with paired features X~_ij = (X_i, X_j).

    The pair (i, j) with i < j becomes one feature of cardinality m_i * m_j
    whose category index is (x_i - 1) * m_j + x_j.  Default: all unordered
    pairs in lexicographic order.  Original features are dropped.
    """
    d = data.schema.n_features
    if pairs is None:
        pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    norm = []
    for (i, j) in pairs:
        if i == j:
            raise SelfPair(f"pair ({i}, {j}) pairs a feature with itself")
        if not (0 <= i < d and 0 <= j < d):
            raise IndexOutOfAlphabet(f"pair ({i}, {j}) outside feature range 0..{d - 1}")
        norm.append((min(i, j), max(i, j)))
    norm.sort()
    if len(set(norm)) != len(norm):
        raise DuplicatePair("pair list contains a repeated pair")
    if not norm:
        raise SelfPair("empty pair list")

    cards = data.schema.cardinalities
    feats = []
    cols = np.zeros((data.n, len(norm)), dtype=np.int64)
    for t, (i, j) in enumerate(norm):
        name_i, cats_i = data.schema.features[i]
        name_j, cats_j = data.schema.features[j]
        cats = tuple(f"{a}|{b}" for a in cats_i for b in cats_j)
        feats.append((f"{name_i}*{name_j}", cats))
        cols[:, t] = (data.rows[:, i] - 1) * cards[j] + data.rows[:, j]
    schema = CategoricalSchema(tuple(feats))
    return Dataset(schema=schema, rows=cols, labels=data.labels.copy())
