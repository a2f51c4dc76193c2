"""Minimum mean-squared-error surrogate and HGR correlation machinery.

The central quantity is

    gamma = min_z  z^T Q z - d^T z + 1/4,

the population least-squares risk of predicting the signed label C from the
indicator vector W.  The minimizer z* drives the linear classifier, and
sqrt(1 - gamma / (q0 (1 - q0))) lower-bounds the smallest HGR maximal
correlation attainable under the given pairwise marginals.  The bound is
tight exactly when a minimizer satisfies h(z*) <= 1/2 and h(-z*) <= 1/2,
where h sums per-feature block maxima.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, cg

from .errors import DegeneratePrior, EmptyDataset, LengthMismatch, SingularSystem
from .joint import JointDistribution
from .marginals import PairwiseMarginals
from .schema import CategoricalSchema, Dataset, indicator_matrix, signed_labels

SEPARABILITY_TOL = 1e-9
_JITTERS = (1e-12, 1e-10, 1e-8)
_CG_TOL = 1e-10


@dataclass(frozen=True)
class SolverStats:
    method: str
    iterations: int
    residual: float


@dataclass(frozen=True)
class QuadSolution:
    """Minimizer of the (optionally ridge-regularized) quadratic surrogate.

    gamma, h_plus, h_minus, and hgr_lower_bound are always evaluated with the
    unregularized objective at the returned z, so the HGR bound stays
    meaningful when ridge is used for estimation.
    """

    z: np.ndarray
    gamma: float
    h_plus: float
    h_minus: float
    separable: bool
    hgr_lower_bound: float
    solver_stats: SolverStats


def h_value(z, schema: CategoricalSchema) -> float:
    """Sum over features of the maximum coefficient inside each block."""
    z = np.asarray(z, dtype=float).ravel()
    if z.size != schema.total_width:
        raise LengthMismatch(f"z has {z.size} entries, schema width is {schema.total_width}")
    return float(sum(z[schema.block(i)].max() for i in range(schema.n_features)))


def solve_psd_system(M: np.ndarray, rhs: np.ndarray, allow_iterative: bool = True):
    """Solve M x = rhs for symmetric PSD M.

    Tries a Cholesky factorization first; on failure walks a jitter ladder of
    1e-12/1e-10/1e-8 times the mean diagonal, and finally falls back to
    conjugate gradients (which converges to the minimum-norm solution of
    consistent singular systems when started at zero).
    """
    try:
        factor = cho_factor(M, lower=True, check_finite=False)
        return cho_solve(factor, rhs, check_finite=False), "cholesky", 0
    except LinAlgError:
        pass
    scale = float(np.mean(np.diag(M)))
    if scale <= 0.0:
        scale = 1.0
    for jitter in _JITTERS:
        try:
            factor = cho_factor(M + (jitter * scale) * np.eye(M.shape[0]),
                                lower=True, check_finite=False)
            return cho_solve(factor, rhs, check_finite=False), f"cholesky+jitter{jitter:g}", 0
        except LinAlgError:
            continue
    if not allow_iterative:
        raise SingularSystem("factorization failed on every jitter level")
    maxiter = 50 * M.shape[0]
    iters = 0

    def _count(_):
        nonlocal iters
        iters += 1

    op = LinearOperator(M.shape, matvec=lambda v: M @ v, dtype=float)
    x, info = cg(op, rhs, rtol=_CG_TOL, atol=0.0, maxiter=maxiter, callback=_count)
    if info > 0:
        raise SingularSystem(f"conjugate gradients failed to converge in {maxiter} iterations")
    return x, "cg", iters


def _finish(schema, gamma, q0, z, stats):
    gamma = max(float(gamma), 0.0)
    h_plus = h_value(z, schema)
    h_minus = h_value(-z, schema)
    separable = h_plus <= 0.5 + SEPARABILITY_TOL and h_minus <= 0.5 + SEPARABILITY_TOL
    if 0.0 < q0 < 1.0:
        bound = float(np.sqrt(max(0.0, 1.0 - gamma / (q0 * (1.0 - q0)))))
    else:
        bound = 0.0
    return QuadSolution(
        z=z,
        gamma=gamma,
        h_plus=h_plus,
        h_minus=h_minus,
        separable=separable,
        hgr_lower_bound=bound,
        solver_stats=stats,
    )


def solve_population(marg: PairwiseMarginals, ridge_lambda: float = 0.0) -> QuadSolution:
    """Minimize z^T Q z - d^T z + ridge * ||z||^2 via the normal system
    (2 Q + 2 ridge I) z = d.  gamma is evaluated at ridge 0."""
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be nonnegative")
    w = marg.schema.total_width
    M = 2.0 * marg.Q + 2.0 * ridge_lambda * np.eye(w)
    z, method, iters = solve_psd_system(M, marg.d_vec)
    resid = float(np.max(np.abs(M @ z - marg.d_vec)))
    gamma = z @ (marg.Q @ z) - marg.d_vec @ z + 0.25
    return _finish(marg.schema, gamma, marg.q0, z,
                   SolverStats(method=method, iterations=iters, residual=resid))


def solve_saa(data: Dataset, ridge_lambda: float = 0.0) -> QuadSolution:
    """Empirical counterpart: minimize (1/n) sum (w_i^T z - c_i)^2 +
    ridge * ||z||^2.

    For total_width <= n this is the width-square normal system; otherwise the
    n-square Gram system (W W^T + n ridge I) a = c is solved and mapped back
    through z = W^T a.  Both give the same minimizer when it is unique.
    """
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be nonnegative")
    if data.n == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    schema = data.schema
    W = indicator_matrix(schema, data.rows)
    c = signed_labels(data.labels)
    n = data.n
    width = schema.total_width
    q0 = float(np.mean(data.labels == 0))
    if width <= n:
        Q = (W.T @ W) / n
        d_vec = (W.T @ (2.0 * c)) / n
        M = 2.0 * Q + 2.0 * ridge_lambda * np.eye(width)
        z, method, iters = solve_psd_system(M, d_vec)
        resid = float(np.max(np.abs(M @ z - d_vec)))
        gamma = z @ (Q @ z) - d_vec @ z + 0.25
        return _finish(schema, gamma, q0, z,
                       SolverStats(method=f"normal/{method}", iterations=iters,
                                   residual=resid))
    G = W @ W.T + (n * ridge_lambda) * np.eye(n)
    a, method, iters = solve_psd_system(G, c)
    z = W.T @ a
    # gamma from the SAA identity (1/n) ||W z - c||^2 = z^T Q z - d^T z + 1/4,
    # avoiding the width-square Q at large widths
    resid_vec = W @ z - c
    gamma = resid_vec @ resid_vec / n
    normal_resid = float(np.max(np.abs(2.0 * (W.T @ resid_vec) / n + 2.0 * ridge_lambda * z)))
    return _finish(schema, gamma, q0, z,
                   SolverStats(method=f"gram/{method}", iterations=iters,
                               residual=normal_resid))


def hgr_binary(p: JointDistribution) -> float:
    """Closed-form HGR maximal correlation against a binary target:
    sqrt(1 - (1/(q(1-q))) * sum_x p(x,0) p(x,1) / (p(x,0) + p(x,1))),
    with zero-mass configurations contributing 0."""
    q = p.p_y0()
    if not 0.0 < q < 1.0:
        raise DegeneratePrior(f"P(Y=0) = {q:.12g} leaves no binary uncertainty")
    tab = p.table()
    mass = tab.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(mass > 0.0, tab[:, 0] * tab[:, 1] / np.where(mass > 0, mass, 1.0), 0.0)
    radicand = 1.0 - terms.sum() / (q * (1.0 - q))
    return float(np.sqrt(max(0.0, radicand)))


def min_hgr_bound(marg: PairwiseMarginals, sol: QuadSolution):
    """Lower bound on the minimum HGR correlation over all joints matching the
    marginals, and whether the bound is certified tight by separability of the
    particular minimizer at hand."""
    if not 0.0 < marg.q0 < 1.0:
        raise DegeneratePrior(f"q0 = {marg.q0:.12g}")
    bound = float(np.sqrt(max(0.0, 1.0 - sol.gamma / (marg.q0 * (1.0 - marg.q0)))))
    return bound, bool(sol.separable)


def saa_objective(data: Dataset, z: np.ndarray, ridge_lambda: float = 0.0) -> float:
    """(1/n) sum (w_i^T z - c_i)^2 + ridge * ||z||^2 at an arbitrary z."""
    W = indicator_matrix(data.schema, data.rows)
    c = signed_labels(data.labels)
    r = W @ z - c
    return float(r @ r / data.n + ridge_lambda * (z @ z))


def population_objective(marg: PairwiseMarginals, z: np.ndarray) -> float:
    """z^T Q z - d^T z + 1/4 at an arbitrary z."""
    z = np.asarray(z, dtype=float)
    return float(z @ (marg.Q @ z) - marg.d_vec @ z + 0.25)
