"""Dense two-phase simplex with Bland's anti-cycling rule.

Desk-scale solver for the exact verification oracles: problems are small
(hundreds of variables), and fidelity of the reported status matters more
than speed.  Variables are nonnegative; equality and upper-bound rows are
accepted, the latter converted internally through slack variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InstanceTooLarge, MaxIterationsExceeded

_TOL = 1e-9
_MAX_VARIABLES = 10_000


@dataclass(frozen=True)
class LpProblem:
    """min (or max) c^T x  subject to  A_eq x = b_eq, A_ub x <= b_ub, x >= 0."""

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    maximize: bool = False


@dataclass(frozen=True)
class LpSolution:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    basis[row] = col


def _iterate(T, basis, n_usable, cap):
    """Bland-rule simplex sweep on a tableau whose last row carries reduced
    costs and last column the right-hand side.  Minimization."""
    count = 0
    while True:
        neg = np.flatnonzero(T[-1, :n_usable] < -_TOL)
        if neg.size == 0:
            return "optimal", count
        enter = int(neg[0])
        col = T[:-1, enter]
        rows = np.flatnonzero(col > _TOL)
        if rows.size == 0:
            return "unbounded", count
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        leave = int(ties[np.argmin(basis[ties])])
        _pivot(T, basis, leave, enter)
        count += 1
        if count > cap:
            raise MaxIterationsExceeded(f"simplex exceeded {cap} pivots")


def lp_solve(problem: LpProblem) -> LpSolution:
    """Two-phase dense simplex.  Infeasible and unbounded statuses are
    reported faithfully; redundant equality rows are tolerated."""
    c = np.asarray(problem.c, dtype=float).ravel()
    n = c.size
    blocks_A, blocks_b = [], []
    if problem.A_eq is not None:
        A = np.atleast_2d(np.asarray(problem.A_eq, dtype=float))
        b = np.asarray(problem.b_eq, dtype=float).ravel()
        if A.shape != (b.size, n):
            raise DimensionMismatch(f"A_eq is {A.shape}, expected ({b.size}, {n})")
        blocks_A.append(A)
        blocks_b.append(b)
    n_slack = 0
    if problem.A_ub is not None:
        A = np.atleast_2d(np.asarray(problem.A_ub, dtype=float))
        b = np.asarray(problem.b_ub, dtype=float).ravel()
        if A.shape != (b.size, n):
            raise DimensionMismatch(f"A_ub is {A.shape}, expected ({b.size}, {n})")
        n_slack = b.size
        if blocks_A:
            blocks_A[0] = np.hstack([blocks_A[0], np.zeros((blocks_b[0].size, n_slack))])
        blocks_A.append(np.hstack([A, np.eye(n_slack)]))
        blocks_b.append(b)
    if not blocks_A:
        raise DimensionMismatch("problem has no constraints")
    A = np.vstack(blocks_A)
    b = np.concatenate(blocks_b)
    m, total = A.shape
    if total > _MAX_VARIABLES:
        raise InstanceTooLarge(f"{total} variables exceed the solver cap of {_MAX_VARIABLES}")

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    sense = -1.0 if problem.maximize else 1.0
    cost = np.zeros(total)
    cost[:n] = sense * c
    cap = max(2000, 200 * (m + total))

    # phase one: artificial basis, minimize the artificial mass
    T = np.zeros((m + 1, total + m + 1))
    T[:-1, :total] = A
    T[:-1, total:total + m] = np.eye(m)
    T[:-1, -1] = b
    T[-1, :total] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(total, total + m)
    status, it1 = _iterate(T, basis, total, cap)
    if status != "optimal" or -T[-1, -1] > 1e-8 * max(1.0, abs(b).max()):
        return LpSolution(status="infeasible", iterations=it1)

    # drive leftover artificial variables out of the basis; rows that cannot
    # pivot are redundant and dropped
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= total:
            pivots = np.flatnonzero(np.abs(T[i, :total]) > _TOL)
            if pivots.size:
                _pivot(T, basis, i, int(pivots[0]))
            else:
                keep[i] = False
    rows = np.concatenate([np.flatnonzero(keep), [m]])
    T = T[rows][:, np.concatenate([np.arange(total), [total + m]])]
    basis = basis[keep]

    # phase two: install the real objective as reduced costs
    T[-1, :] = 0.0
    T[-1, :total] = cost
    for i, bv in enumerate(basis):
        if cost[bv] != 0.0:
            T[-1] -= cost[bv] * T[i]
    status, it2 = _iterate(T, basis, total, cap)
    if status == "unbounded":
        return LpSolution(status="unbounded", iterations=it1 + it2)
    x = np.zeros(total)
    x[basis] = T[:-1, -1]
    x = np.where(np.abs(x) < 1e-12, 0.0, x)
    return LpSolution(status="optimal", x=x[:n], objective=float(c @ x[:n]),
                      iterations=it1 + it2)
