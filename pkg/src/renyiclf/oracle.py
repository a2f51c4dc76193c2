"""Exact small-instance oracles for the worst-case error quantities.

Everything here enumerates the joint outcome space explicitly, so it only
runs at desk scale, but within that scale the numbers are trustworthy enough
to machine-check the theory: the minimax error e* of the best randomized
rule, the harmonic surrogate theta, worst-case error of arbitrary rules, and
brute-force HGR correlations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePrior,
    Infeasible,
    InstanceTooLarge,
    MaxIterationsExceeded,
)
from .joint import DecisionRule, JointDistribution, check_enumerable
from .marginals import MarginalConstraints
from .schema import CategoricalSchema
from .simplex import LpProblem, LpSolution, lp_solve

_RANDOM_INSTANCE_MAX_OUTCOMES = 4096

# Below this mass a configuration is treated as unreachable: solver dust at
# or under this scale carries meaningless conditionals, so rules fall back to
# their zero-mass conventions there.
_RULE_MASS_TOL = 1e-9


def _constraint_system(cons: MarginalConstraints):
    n = cons.n_outcomes
    A_eq = np.vstack([cons.A, np.ones((1, n))])
    b_eq = np.concatenate([cons.b, [1.0]])
    return A_eq, b_eq


def _lp_over_c(cons: MarginalConstraints, objective: np.ndarray) -> LpSolution:
    """max objective . p over C = {A p = b, 1^T p = 1, p >= 0}."""
    A_eq, b_eq = _constraint_system(cons)
    sol = lp_solve(LpProblem(c=objective, A_eq=A_eq, b_eq=b_eq, maximize=True))
    if sol.status == "infeasible":
        raise Infeasible("the marginal constraints admit no joint distribution")
    if sol.status != "optimal":
        raise MaxIterationsExceeded(f"unexpected LP status {sol.status!r} on a bounded polytope")
    return sol


def _as_joint(schema: CategoricalSchema, p: np.ndarray) -> JointDistribution:
    p = np.maximum(np.asarray(p, dtype=float), 0.0)
    p[p < 1e-13] = 0.0          # snap solver dust to exact zeros
    return JointDistribution(schema=schema, p=p / p.sum())


def feasible_point(cons: MarginalConstraints) -> JointDistribution:
    """Any member of C, via a phase-one solve; raises Infeasible otherwise."""
    sol = _lp_over_c(cons, np.zeros(cons.n_outcomes))
    return _as_joint(cons.schema, sol.x)


def worst_case_error(cons: MarginalConstraints, rule: DecisionRule) -> float:
    """max over C of sum_x [q_x p_{x,1} + (1 - q_x) p_{x,0}], the worst-case
    misclassification rate of the given randomized rule."""
    n_cfg = cons.schema.n_configurations()
    q = np.asarray(rule.q_delta, dtype=float)
    if q.size != n_cfg:
        raise InstanceTooLarge(f"rule covers {q.size} configurations, instance has {n_cfg}")
    obj = np.empty(2 * n_cfg)
    obj[0::2] = 1.0 - q          # predicting 1 is wrong when Y = 0
    obj[1::2] = q                # predicting 0 is wrong when Y = 1
    return float(_lp_over_c(cons, obj).objective)


def solve_estar(cons: MarginalConstraints):
    """Minimax error of the best randomized rule and a worst-case joint:
    maximize sum_x min(p_{x,0}, p_{x,1}) over C, lifted to an LP with
    auxiliaries t_x <= p_{x,0}, t_x <= p_{x,1}."""
    n_cfg = cons.schema.n_configurations()
    n = 2 * n_cfg
    A_eq, b_eq = _constraint_system(cons)
    A_eq = np.hstack([A_eq, np.zeros((A_eq.shape[0], n_cfg))])
    c = np.concatenate([np.zeros(n), np.ones(n_cfg)])
    A_ub = np.zeros((2 * n_cfg, n + n_cfg))
    for x in range(n_cfg):
        A_ub[2 * x, n + x] = 1.0
        A_ub[2 * x, 2 * x] = -1.0          # t_x - p_{x,0} <= 0
        A_ub[2 * x + 1, n + x] = 1.0
        A_ub[2 * x + 1, 2 * x + 1] = -1.0  # t_x - p_{x,1} <= 0
    sol = lp_solve(LpProblem(c=c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub,
                             b_ub=np.zeros(2 * n_cfg), maximize=True))
    if sol.status == "infeasible":
        raise Infeasible("the marginal constraints admit no joint distribution")
    if sol.status != "optimal":
        raise MaxIterationsExceeded(f"unexpected LP status {sol.status!r}")
    p_star = _as_joint(cons.schema, sol.x[:n])
    return float(sol.objective), p_star


def solve_estar_subset(cons: MarginalConstraints, subset) -> float:
    """Minimax error over rules that may only read the features in subset:
    maximize sum over x_S of min of the (X_S, Y) marginal mass, the
    restricted analogue of solve_estar.  subset may be empty (constant
    rules)."""
    schema = cons.schema
    n_cfg = schema.n_configurations()
    n = 2 * n_cfg
    subset = tuple(sorted(set(int(i) for i in subset)))
    cards = schema.cardinalities
    grid = np.stack(np.unravel_index(np.arange(n_cfg), cards), axis=1)
    if subset:
        sub_cards = [cards[i] for i in subset]
        group = np.ravel_multi_index(
            tuple(grid[:, i] for i in subset), tuple(sub_cards))
        n_groups = int(np.prod(sub_cards))
    else:
        group = np.zeros(n_cfg, dtype=np.int64)
        n_groups = 1
    A_eq, b_eq = _constraint_system(cons)
    A_eq = np.hstack([A_eq, np.zeros((A_eq.shape[0], n_groups))])
    c = np.concatenate([np.zeros(n), np.ones(n_groups)])
    A_ub = np.zeros((2 * n_groups, n + n_groups))
    for s in range(n_groups):
        members = np.flatnonzero(group == s)
        for y in (0, 1):
            r = 2 * s + y
            A_ub[r, n + s] = 1.0
            A_ub[r, 2 * members + y] = -1.0
    sol = lp_solve(LpProblem(c=c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub,
                             b_ub=np.zeros(2 * n_groups), maximize=True))
    if sol.status == "infeasible":
        raise Infeasible("the marginal constraints admit no joint distribution")
    if sol.status != "optimal":
        raise MaxIterationsExceeded(f"unexpected LP status {sol.status!r}")
    return float(sol.objective)


def _harmonic_value(p: np.ndarray) -> float:
    tab = p.reshape(-1, 2)
    mass = tab.sum(axis=1)
    safe = np.where(mass > 0.0, mass, 1.0)
    return float(np.sum(np.where(mass > 0.0, tab[:, 0] * tab[:, 1] / safe, 0.0)))


def _harmonic_value_smoothed(p: np.ndarray, eps: float) -> float:
    tab = p.reshape(-1, 2)
    return float(np.sum(tab[:, 0] * tab[:, 1] / (tab.sum(axis=1) + eps)))


def _harmonic_gradient(p: np.ndarray, eps: float) -> np.ndarray:
    """Gradient of the smoothed objective sum_x a b / (a + b + eps).

    The unsmoothed objective is not differentiable where a cell carries no
    mass, and any fixed supergradient there overstates the directional
    derivative along some feasible ray, which stalls Frank-Wolfe on boundary
    iterates.  The smoothed gradient is exact everywhere and the smoothing
    bias is accounted for in the reported duality gap.
    """
    tab = p.reshape(-1, 2)
    denom = (tab.sum(axis=1) + eps) ** 2
    g = np.empty_like(tab)
    g[:, 0] = tab[:, 1] * (tab[:, 1] + eps) / denom
    g[:, 1] = tab[:, 0] * (tab[:, 0] + eps) / denom
    return g.ravel()


def _line_search(x, direction, gamma_max, eps):
    """Exact maximization of the concave 1-d slice gamma -> f(x + gamma dir)
    by bisecting the sign change of its derivative."""
    def slope(gamma):
        return float(_harmonic_gradient(x + gamma * direction, eps) @ direction)

    lo, hi = 0.0, gamma_max
    if slope(hi) >= 0.0:
        return hi
    if slope(lo) <= 0.0:
        return lo
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ThetaSolution:
    theta: float
    p_tilde: JointDistribution
    gap: float
    iterations: int
    objective_trace: tuple[float, ...] = ()


def solve_theta(cons: MarginalConstraints, tol: float = 1e-7,
                max_iter: int = 50_000, line_search: bool = True,
                away_steps: bool = True) -> ThetaSolution:
    """Maximize sum_x p_{x,1} p_{x,0} / (p_{x,1} + p_{x,0}) over C by
    Frank-Wolfe with the simplex LP as linear-maximization oracle.

    Internally the objective is smoothed to a b / (a + b + eps) with eps tiny
    enough that the uniform bias (one quarter eps per configuration) stays
    well below tol; the reported gap includes that bias, so on return
    theta <= theta_true <= theta + gap holds for the exact objective.  Away
    steps (on by default) restore fast convergence when the optimum sits on
    a low-dimensional face.  objective_trace records the smoothed objective,
    which exact line search makes non-decreasing.
    """
    n_cells = cons.schema.n_configurations()
    eps = min(1e-12, tol / (8.0 * n_cells))
    bias = 0.25 * n_cells * eps
    x = feasible_point(cons).p.copy()
    atoms: list[np.ndarray] = [x.copy()]
    weights: list[float] = [1.0]
    trace = [_harmonic_value_smoothed(x, eps)]
    gap = np.inf
    for it in range(1, max_iter + 1):
        g = _harmonic_gradient(x, eps)
        s = _lp_over_c(cons, g).x
        d_fw = s - x
        gap = float(g @ d_fw)
        if gap + bias <= tol:
            return ThetaSolution(theta=_harmonic_value(x),
                                 p_tilde=_as_joint(cons.schema, x),
                                 gap=max(gap, 0.0) + bias, iterations=it - 1,
                                 objective_trace=tuple(trace))
        use_away = False
        if away_steps and len(atoms) > 1:
            scores = [float(g @ a) for a in atoms]
            worst = int(np.argmin(scores))
            d_aw = x - atoms[worst]
            if float(g @ d_aw) > gap:
                use_away = True
        if use_away:
            w = weights[worst]
            gamma_max = w / (1.0 - w) if w < 1.0 else 1.0
            direction = d_aw
        else:
            gamma_max = 1.0
            direction = d_fw
        if line_search:
            gamma = _line_search(x, direction, gamma_max, eps)
        else:
            gamma = min(2.0 / (it + 2.0), gamma_max)
        if gamma <= 0.0:
            gamma = min(1e-12, gamma_max)
        if use_away:
            scale = 1.0 + gamma
            weights = [w * scale for w in weights]
            weights[worst] -= gamma
        else:
            weights = [w * (1.0 - gamma) for w in weights]
            matched = False
            for idx, a in enumerate(atoms):
                if np.array_equal(a, s):
                    weights[idx] += gamma
                    matched = True
                    break
            if not matched:
                atoms.append(s.copy())
                weights.append(gamma)
        x = x + gamma * direction
        trace.append(_harmonic_value_smoothed(x, eps))
        live = [i for i, w in enumerate(weights) if w > 1e-14]
        atoms = [atoms[i] for i in live]
        weights = [weights[i] for i in live]
        total = sum(weights)
        weights = [w / total for w in weights]
        if it % 64 == 0:
            # resynthesize from atoms to cancel accumulated drift
            x = np.einsum("i,ij->j", np.asarray(weights), np.asarray(atoms))
    raise MaxIterationsExceeded(
        f"Frank-Wolfe gap {gap + bias:.3e} still above tol {tol:.3e} after {max_iter} iterations"
    )


def hgr_bruteforce(p: JointDistribution) -> float:
    """HGR maximal correlation by flattening X to one alphabet: the second
    singular value of B with B[x, y] = p(x, y) / sqrt(p_X(x) p_Y(y)), rows of
    zero feature mass dropped.  With binary Y this reduces to a 2x2
    eigenproblem whose top eigenvalue is the trivial 1."""
    tab = p.table()
    py = tab.sum(axis=0)
    if not (py[0] > 0.0 and py[1] > 0.0):
        raise DegeneratePrior(f"P(Y=0) = {py[0]:.12g} admits no correlation analysis")
    px = tab.sum(axis=1)
    keep = px > 0.0
    B = tab[keep] / np.sqrt(np.outer(px[keep], py))
    M = B.T @ B
    eigs = np.linalg.eigvalsh(M)
    return float(np.sqrt(np.clip(eigs[0], 0.0, 1.0)))


def map_rule_of(p: JointDistribution) -> DecisionRule:
    """Deterministic argmax-label rule, ties broken toward the larger class
    prior and then toward label 0.  Configurations with (numerically) no
    mass count as ties."""
    tab = p.table()
    q0 = p.p_y0()
    tie = 1.0 if q0 >= 0.5 else 0.0
    diff = np.where(tab.sum(axis=1) > _RULE_MASS_TOL, tab[:, 0] - tab[:, 1], 0.0)
    q = np.where(diff > 1e-12, 1.0, np.where(diff < -1e-12, 0.0, tie))
    return DecisionRule(q_delta=q)


def renyi_rule_of(p: JointDistribution) -> DecisionRule:
    """Randomized rule with squared-probability weights:
    q_x = p_{x,0}^2 / (p_{x,0}^2 + p_{x,1}^2), 1/2 where the configuration
    carries (numerically) no mass and the ratio would be solver noise."""
    tab = p.table()
    sq = tab ** 2
    denom = sq.sum(axis=1)
    live = tab.sum(axis=1) > _RULE_MASS_TOL
    q = np.where(live, sq[:, 0] / np.where(denom > 0.0, denom, 1.0), 0.5)
    return DecisionRule(q_delta=q)


def random_instance(seed: int, d: int, m: int, mode: str = "generic",
                    interior_margin: float = 0.05) -> JointDistribution:
    """Reproducible test instances over d features with alphabet size m.

    generic: symmetric-Dirichlet draw over every outcome.
    separable: random P(X) times an additive conditional E[Y|X=x] =
        sum_i zeta_i(x_i), rescaled so the sum stays inside
        [interior_margin, 1 - interior_margin].
    deterministic: uniform P(X) with Y = 1{x_1 = 1}.
    """
    cards = tuple([int(m)] * int(d))
    schema = CategoricalSchema.from_cardinalities(cards)
    check_enumerable(schema, _RANDOM_INSTANCE_MAX_OUTCOMES)
    n_cfg = schema.n_configurations()
    rng = np.random.default_rng(seed)
    if mode == "generic":
        p = rng.dirichlet(np.ones(2 * n_cfg))
        return JointDistribution(schema=schema, p=p)
    if mode == "separable":
        px = rng.dirichlet(np.ones(n_cfg))
        zetas = [rng.uniform(0.0, 1.0, size=m) for _ in range(d)]
        grid = np.stack(np.unravel_index(np.arange(n_cfg), cards), axis=1)
        total = np.zeros(n_cfg)
        for i in range(d):
            total += zetas[i][grid[:, i]]
        lo = sum(z.min() for z in zetas)
        hi = sum(z.max() for z in zetas)
        if hi - lo < 1e-12:
            eta = np.full(n_cfg, 0.5)
        else:
            span = 1.0 - 2.0 * interior_margin
            eta = interior_margin + span * (total - lo) / (hi - lo)
        p = np.empty(2 * n_cfg)
        p[0::2] = px * (1.0 - eta)
        p[1::2] = px * eta
        return JointDistribution(schema=schema, p=p)
    if mode == "deterministic":
        px = np.full(n_cfg, 1.0 / n_cfg)
        grid = np.stack(np.unravel_index(np.arange(n_cfg), cards), axis=1)
        y1 = (grid[:, 0] == 0).astype(float)
        p = np.empty(2 * n_cfg)
        p[0::2] = px * (1.0 - y1)
        p[1::2] = px * y1
        return JointDistribution(schema=schema, p=p)
    raise ValueError(f"unknown instance mode {mode!r}")


def sample_feasible(cons: MarginalConstraints, seed: int, count: int):
    """Heuristic coverage of C: maximize random linear objectives to reach
    vertices, then mix them with a feasible point.  Not uniform sampling."""
    rng = np.random.default_rng(seed)
    base = feasible_point(cons).p
    out = []
    for _ in range(count):
        obj = rng.standard_normal(cons.n_outcomes)
        vertex = _lp_over_c(cons, obj).x
        lam = rng.uniform(0.0, 1.0)
        out.append(_as_joint(cons.schema, lam * vertex + (1.0 - lam) * base))
    return out
