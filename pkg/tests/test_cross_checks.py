"""Independent cross-checks of the exact oracles on their production problem
shapes: the in-package simplex against scipy's HiGHS, and the Frank-Wolfe
harmonic solve against a conic reformulation in cvxpy."""

import numpy as np
import pytest
from scipy.optimize import linprog

import renyiclf as rc
from renyiclf.oracle import _constraint_system


def oracle_constraints(seed, d, m):
    inst = rc.random_instance(seed, d=d, m=m, mode="generic")
    return inst, rc.build_constraints(rc.from_joint(inst))


class TestEstarAgainstScipy:
    def test_lifted_lp_values_match(self):
        for t in range(30):
            d = 2 + (t % 2)
            m = 2 if d == 3 else 2 + (t % 3 == 0)
            inst, cons = oracle_constraints(910000 + t, d, int(m))
            e_star, _ = rc.solve_estar(cons)
            n_cfg = inst.n_configs
            n = 2 * n_cfg
            A_eq, b_eq = _constraint_system(cons)
            A_eq = np.hstack([A_eq, np.zeros((A_eq.shape[0], n_cfg))])
            c = np.concatenate([np.zeros(n), np.ones(n_cfg)])
            A_ub = np.zeros((2 * n_cfg, n + n_cfg))
            for x in range(n_cfg):
                A_ub[2 * x, n + x] = 1.0
                A_ub[2 * x, 2 * x] = -1.0
                A_ub[2 * x + 1, n + x] = 1.0
                A_ub[2 * x + 1, 2 * x + 1] = -1.0
            ref = linprog(-c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub,
                          b_ub=np.zeros(2 * n_cfg), bounds=(0, None), method="highs")
            assert ref.status == 0
            assert e_star == pytest.approx(-ref.fun, abs=1e-8)


class TestWorstCaseAgainstScipy:
    def test_random_rules_match(self):
        rng = np.random.default_rng(5)
        for t in range(30):
            inst, cons = oracle_constraints(920000 + t, 2, 2 + t % 2)
            rule = rc.DecisionRule(q_delta=rng.uniform(0, 1, size=inst.n_configs))
            ours = rc.worst_case_error(cons, rule)
            obj = np.empty(2 * inst.n_configs)
            obj[0::2] = 1.0 - rule.q_delta
            obj[1::2] = rule.q_delta
            A_eq, b_eq = _constraint_system(cons)
            ref = linprog(-obj, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
            assert ref.status == 0
            assert ours == pytest.approx(-ref.fun, abs=1e-8)


class TestThetaAgainstCvxpy:
    def test_values_match_conic_solve(self):
        cvxpy = pytest.importorskip("cvxpy")
        for t in range(15):
            d = 2 + (t % 3 == 0)
            m = 2 + (t % 2 if d == 2 else 0)
            inst, cons = oracle_constraints(930000 + t, d, m)
            sol = rc.solve_theta(cons, tol=1e-9, max_iter=30_000)
            A_eq, b_eq = _constraint_system(cons)
            n = cons.n_outcomes
            p = cvxpy.Variable(n, nonneg=True)
            terms = [0.5 * cvxpy.harmonic_mean(p[2 * x: 2 * x + 2])
                     for x in range(n // 2)]
            prob = cvxpy.Problem(cvxpy.Maximize(cvxpy.sum(cvxpy.hstack(terms))),
                                 [A_eq @ p == b_eq])
            prob.solve(solver="CLARABEL")
            assert sol.theta == pytest.approx(prob.value, abs=5e-8)
