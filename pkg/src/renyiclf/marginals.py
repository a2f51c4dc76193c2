"""First- and second-order marginal estimation and explicit constraint systems.

PairwiseMarginals packs the quadratic form used throughout the package:
Q = E[W W^T] over indicator vectors (single-feature marginals on the diagonal
blocks, pairwise tables off-diagonal), d_vec[k] = P(X_i = k, Y = 1) -
P(X_i = k, Y = 0) blockwise, and the class prior q0 = P(Y = 0).

MarginalConstraints spells the same information out as a 0/1 system
A p = b over the enumerated joint outcome space, for use by the exact oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, InstanceTooLarge
from .joint import JointDistribution
from .schema import CategoricalSchema, Dataset, indicator_matrix, signed_labels

_PSD_CHECK_MAX_WIDTH = 512
_BLOCK_TOL = 1e-9


@dataclass(frozen=True)
class PairwiseMarginals:
    schema: CategoricalSchema
    Q: np.ndarray
    d_vec: np.ndarray
    q0: float
    n: int = 0
    smoothing_alpha: float = 0.0

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        d_vec = np.asarray(self.d_vec, dtype=float).ravel()
        w = self.schema.total_width
        if Q.shape != (w, w) or d_vec.shape != (w,):
            raise ValueError(f"Q/d_vec shapes {Q.shape}/{d_vec.shape} do not match width {w}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "d_vec", d_vec)
        self._validate()

    def _validate(self):
        Q, d_vec, schema = self.Q, self.d_vec, self.schema
        if np.abs(Q - Q.T).max() > _BLOCK_TOL:
            raise ValueError("Q is not symmetric")
        if Q.min() < -_BLOCK_TOL or Q.max() > 1 + _BLOCK_TOL:
            raise ValueError("Q entries must be probabilities in [0, 1]")
        if not 0.0 <= self.q0 <= 1.0:
            raise ValueError("q0 must be a probability")
        for i in range(schema.n_features):
            bi = schema.block(i)
            diag_block = Q[bi, bi]
            off = diag_block - np.diag(np.diag(diag_block))
            if np.abs(off).max() > _BLOCK_TOL:
                raise ValueError(f"diagonal block {i} is not diagonal")
            if abs(np.trace(diag_block) - 1.0) > 1e-6:
                raise ValueError(f"single-feature marginal {i} does not sum to 1")
            if abs(self.d_vec[bi].sum() - (1.0 - 2.0 * self.q0)) > 1e-6:
                raise ValueError(f"d_vec block {i} does not sum to 1 - 2*q0")
            for j in range(i + 1, schema.n_features):
                bj = schema.block(j)
                blk = Q[bi, bj]
                if abs(blk.sum() - 1.0) > 1e-6:
                    raise ValueError(f"pairwise table ({i},{j}) does not sum to 1")
        # Exactness of the PSD invariant is only cheap to confirm at small
        # widths; larger instances rely on Q being built as (1/n) W^T W.
        if self.schema.total_width <= _PSD_CHECK_MAX_WIDTH and self.smoothing_alpha == 0.0:
            eigmin = float(np.linalg.eigvalsh(Q)[0])
            if eigmin < -1e-8:
                raise ValueError(f"Q has negative eigenvalue {eigmin:.3e}")

    def feature_marginal(self, i: int) -> np.ndarray:
        """P(X_i = k) for k = 1..m_i."""
        return np.diag(self.Q[self.schema.block(i), self.schema.block(i)]).copy()

    def feature_label_table(self, i: int) -> np.ndarray:
        """(m_i, 2) table of P(X_i = k, Y = y), columns y = 0, 1."""
        px = self.feature_marginal(i)
        di = self.d_vec[self.schema.block(i)]
        p1 = (px + di) / 2.0
        p0 = (px - di) / 2.0
        return np.stack([p0, p1], axis=1)

    def pair_table(self, i: int, j: int) -> np.ndarray:
        """(m_i, m_j) table of P(X_i = k, X_j = l)."""
        return self.Q[self.schema.block(i), self.schema.block(j)].copy()


def _smooth_table(table: np.ndarray, n: int, alpha: float) -> np.ndarray:
    """Additive smoothing of one probability table: mix toward uniform with
    pseudo-count alpha per cell, then renormalize."""
    cells = table.size
    return (n * table + alpha) / (n + alpha * cells)


def estimate(data: Dataset, smoothing_alpha: float = 0.0) -> PairwiseMarginals:
    """Empirical marginals: Q = (1/n) sum w w^T, d_vec = (2/n) sum c w.

    With smoothing_alpha > 0, each pairwise and feature-label table is mixed
    toward uniform with that pseudo-count and the result is flagged; Q may
    then no longer be an exact E[W W^T].
    """
    if data.n == 0:
        raise EmptyDataset("cannot estimate marginals from an empty dataset")
    if data.permissive and np.any(data.rows == 0):
        raise EmptyDataset("cannot estimate marginals from rows with unseen categories")
    W = indicator_matrix(data.schema, data.rows)
    c = signed_labels(data.labels)
    n = data.n
    Q = (W.T @ W) / n
    d_vec = (W.T @ (2.0 * c)) / n
    q0 = float(np.mean(data.labels == 0))
    if smoothing_alpha > 0.0:
        Q, d_vec, q0 = _apply_smoothing(data.schema, Q, d_vec, q0, n, smoothing_alpha)
    return PairwiseMarginals(schema=data.schema, Q=Q, d_vec=d_vec, q0=q0, n=n,
                             smoothing_alpha=smoothing_alpha)


def _apply_smoothing(schema, Q, d_vec, q0, n, alpha):
    Qs = Q.copy()
    ds = d_vec.copy()
    for i in range(schema.n_features):
        bi = schema.block(i)
        fl = np.stack([(np.diag(Q[bi, bi]) - d_vec[bi]) / 2.0,
                       (np.diag(Q[bi, bi]) + d_vec[bi]) / 2.0], axis=1)
        fl = _smooth_table(fl, n, alpha)
        Qs[bi, bi] = np.diag(fl.sum(axis=1))
        ds[bi] = fl[:, 1] - fl[:, 0]
        for j in range(i + 1, schema.n_features):
            bj = schema.block(j)
            tab = _smooth_table(Q[bi, bj], n, alpha)
            Qs[bi, bj] = tab
            Qs[bj, bi] = tab.T
    q0s = (n * q0 + alpha) / (n + 2 * alpha)
    return Qs, ds, q0s


def from_joint(p: JointDistribution) -> PairwiseMarginals:
    """Exact marginalization of an explicit joint distribution (n = 0)."""
    schema = p.schema
    tab = p.table()
    cards = schema.cardinalities
    shaped = tab.reshape(cards + (2,))
    w = schema.total_width
    Q = np.zeros((w, w))
    d_vec = np.zeros(w)
    d = schema.n_features
    axes = tuple(range(d))
    for i in range(d):
        bi = schema.block(i)
        keep = tuple(ax for ax in axes if ax != i)
        fl = shaped.sum(axis=keep)            # (m_i, 2)
        Q[bi, bi] = np.diag(fl.sum(axis=1))
        d_vec[bi] = fl[:, 1] - fl[:, 0]
        for j in range(i + 1, d):
            bj = schema.block(j)
            keep = tuple(ax for ax in axes if ax not in (i, j)) + (d,)
            pair = shaped.sum(axis=keep)      # (m_i, m_j)
            Q[bi, bj] = pair
            Q[bj, bi] = pair.T
    return PairwiseMarginals(schema=schema, Q=Q, d_vec=d_vec, q0=p.p_y0(), n=0)


@dataclass(frozen=True)
class MarginalConstraints:
    """Explicit linear system A p = b over the enumerated outcome space.

    Rows select the joint outcomes consistent with one constrained event:
    every pairwise event {X_i = k, X_j = l} with i < j and every feature-label
    event {X_i = k, Y = y}.  Column 2 * config + y follows JointDistribution.
    """

    schema: CategoricalSchema
    A: np.ndarray
    b: np.ndarray
    row_events: tuple = field(default=())

    @property
    def n_outcomes(self) -> int:
        return self.A.shape[1]


def _event_rows(schema, events, max_outcomes, max_dense_entries):
    n_cfg = schema.n_configurations()
    n_out = 2 * n_cfg
    if n_out > max_outcomes:
        raise InstanceTooLarge(
            f"{n_out} outcomes exceed the enumeration cap of {max_outcomes}"
        )
    if len(events) * n_out > max_dense_entries:
        raise InstanceTooLarge(
            f"dense constraint matrix would hold {len(events) * n_out} entries "
            f"(cap {max_dense_entries})"
        )
    cards = schema.cardinalities
    grid = np.stack(np.unravel_index(np.arange(n_cfg), cards), axis=1) + 1
    A = np.zeros((len(events), n_out))
    b = np.zeros(len(events))
    for r, (kind, key, prob) in enumerate(events):
        if kind == "pair":
            i, k, j, l = key
            mask = (grid[:, i] == k) & (grid[:, j] == l)
            cols = np.flatnonzero(mask)
            A[r, 2 * cols] = 1.0
            A[r, 2 * cols + 1] = 1.0
        else:
            i, k, y = key
            cols = np.flatnonzero(grid[:, i] == k)
            A[r, 2 * cols + y] = 1.0
        b[r] = prob
    return A, b


def build_constraints(marg: PairwiseMarginals, max_outcomes: int = 2_000_000,
                      max_dense_entries: int = 100_000_000) -> MarginalConstraints:
    """Enumerate the outcome space and emit one row per marginal event.

    Redundant rows are kept; the LP oracle's phase one tolerates them.  Raises
    InstanceTooLarge when the outcome count or the dense matrix would be
    unmanageable.
    """
    schema = marg.schema
    d = schema.n_features
    cards = schema.cardinalities
    events = []
    for i in range(d):
        for j in range(i + 1, d):
            tab = marg.pair_table(i, j)
            for k in range(1, cards[i] + 1):
                for l in range(1, cards[j] + 1):
                    events.append(("pair", (i, k, j, l), tab[k - 1, l - 1]))
    for i in range(d):
        fl = marg.feature_label_table(i)
        for k in range(1, cards[i] + 1):
            for y in (0, 1):
                events.append(("label", (i, k, y), fl[k - 1, y]))
    A, b = _event_rows(schema, events, max_outcomes, max_dense_entries)
    return MarginalConstraints(schema=schema, A=A, b=b,
                               row_events=tuple((k, s) for k, s, _ in events))


def constraints_from_tables(schema: CategoricalSchema, pair_tables: dict,
                            feature_label_tables: dict,
                            max_outcomes: int = 2_000_000,
                            max_dense_entries: int = 100_000_000) -> MarginalConstraints:
    """Assemble a constraint system from raw tables, without consistency
    checks.  pair_tables maps (i, j) with i < j to (m_i, m_j) arrays;
    feature_label_tables maps i to (m_i, 2) arrays with columns y = 0, 1.
    Intended for hand-built (possibly infeasible) instances."""
    cards = schema.cardinalities
    events = []
    for (i, j), tab in sorted(pair_tables.items()):
        tab = np.asarray(tab, dtype=float)
        for k in range(1, cards[i] + 1):
            for l in range(1, cards[j] + 1):
                events.append(("pair", (i, k, j, l), tab[k - 1, l - 1]))
    for i, tab in sorted(feature_label_tables.items()):
        tab = np.asarray(tab, dtype=float)
        for k in range(1, cards[i] + 1):
            for y in (0, 1):
                events.append(("label", (i, k, y), tab[k - 1, y]))
    A, b = _event_rows(schema, events, max_outcomes, max_dense_entries)
    return MarginalConstraints(schema=schema, A=A, b=b,
                               row_events=tuple((k, s) for k, s, _ in events))
