"""Machine checks of the worst-case-error guarantees on random instances.

Each suite draws reproducible small instances, computes the exact oracle
quantities, and confirms the advertised inequality chains.  The CLI's
"oracle verify" command and the acceptance tests both run through here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .classifier import RenyiModel, predict_conditional, prediction_from_score
from .core import hgr_binary, min_hgr_bound, solve_population
from .joint import DecisionRule, JointDistribution
from .marginals import PairwiseMarginals, build_constraints, from_joint

DEFAULT_TOL = 1e-6


@dataclass
class SuiteReport:
    name: str
    trials: int
    failures: list = field(default_factory=list)
    worst_slack: float = np.inf

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, condition: bool, slack: float, message: str, dump: str = ""):
        self.worst_slack = min(self.worst_slack, slack)
        if not condition:
            self.failures.append((message, dump))


def classifier_rule_from_joint(p: JointDistribution, clip_epsilon: float = 0.0) -> DecisionRule:
    """Randomized rule obtained by pushing the joint's conditionals through
    the classifier's score -> weights arithmetic (score = P(Y=1|x) - 1/2).
    Numerically massless configurations get the fair-coin fallback."""
    tab = p.table()
    mass = tab.sum(axis=1)
    q0 = p.p_y0()
    q = np.empty(tab.shape[0])
    for x in range(tab.shape[0]):
        if mass[x] <= oracle._RULE_MASS_TOL:
            q[x] = 0.5
            continue
        score = tab[x, 1] / mass[x] - 0.5
        q[x] = prediction_from_score(score, q0=q0, clip_epsilon=clip_epsilon).prob_predict_0
    return DecisionRule(q_delta=q)


def classifier_map_rule_from_joint(p: JointDistribution) -> DecisionRule:
    """Deterministic rule from the classifier's sign logic on conditionals."""
    tab = p.table()
    mass = tab.sum(axis=1)
    q0 = p.p_y0()
    q = np.empty(tab.shape[0])
    for x in range(tab.shape[0]):
        if mass[x] <= oracle._RULE_MASS_TOL:
            q[x] = 1.0 if q0 >= 0.5 else 0.0
            continue
        score = tab[x, 1] / mass[x] - 0.5
        label = prediction_from_score(score, q0=q0).map_label
        q[x] = 1.0 if label == 0 else 0.0
    return DecisionRule(q_delta=q)


def model_from_marginals(marg: PairwiseMarginals, ridge_lambda: float = 0.0) -> RenyiModel:
    """Population-trained model for an explicit marginal system."""
    sol = solve_population(marg, ridge_lambda)
    return RenyiModel(schema=marg.schema, z=sol.z, ridge_lambda=ridge_lambda,
                      gamma=sol.gamma, separable=sol.separable, h_plus=sol.h_plus,
                      h_minus=sol.h_minus, q0=marg.q0, train_n=0)


def model_rule(model: RenyiModel, schema) -> DecisionRule:
    """Randomized rule of a trained model across every configuration."""
    n_cfg = schema.n_configurations()
    cards = schema.cardinalities
    q = np.empty(n_cfg)
    grid = np.stack(np.unravel_index(np.arange(n_cfg), cards), axis=1) + 1
    for cfg in range(n_cfg):
        q[cfg] = predict_conditional(model, grid[cfg]).prob_predict_0
    return DecisionRule(q_delta=q)


@dataclass(frozen=True)
class InstanceQuantities:
    instance: JointDistribution
    e_star: float
    theta: float
    fw_gap: float
    wce_renyi: float
    wce_map: float
    p_tilde: JointDistribution


def bound_quantities(instance: JointDistribution, theta_tol: float = 1e-9,
                     max_iter: int = 50_000) -> InstanceQuantities:
    cons = build_constraints(from_joint(instance))
    e_star, _ = oracle.solve_estar(cons)
    theta_sol = oracle.solve_theta(cons, tol=theta_tol, max_iter=max_iter)
    wce_renyi = oracle.worst_case_error(cons, classifier_rule_from_joint(theta_sol.p_tilde))
    wce_map = oracle.worst_case_error(cons, classifier_map_rule_from_joint(theta_sol.p_tilde))
    return InstanceQuantities(instance=instance, e_star=e_star,
                              theta=theta_sol.theta, fw_gap=theta_sol.gap,
                              wce_renyi=wce_renyi, wce_map=wce_map,
                              p_tilde=theta_sol.p_tilde)


def suite_error_chains(trials: int, seed: int = 0, d: int = 2, m: int = 2,
                       tol: float = DEFAULT_TOL):
    """Randomized-rule chain theta <= e~ <= 2 theta <= 2 e* and deterministic
    chain e* <= e~map <= 4 e*, plus the Frank-Wolfe gap certificate."""
    chain = SuiteReport(name="randomized-rule-chain", trials=trials)
    map_chain = SuiteReport(name="map-rule-chain", trials=trials)
    certificate = SuiteReport(name="frank-wolfe-certificate", trials=trials)
    for t in range(trials):
        inst = oracle.random_instance(seed + t, d=d, m=m, mode="generic")
        q = bound_quantities(inst)
        dump = inst.dump()
        links = [
            (q.wce_renyi - q.theta, "theta <= wce(randomized)"),
            (2.0 * q.theta - q.wce_renyi, "wce(randomized) <= 2 theta"),
            (2.0 * q.e_star - 2.0 * q.theta, "2 theta <= 2 e*"),
        ]
        for slack, label in links:
            chain.check(slack >= -tol, slack, f"seed {seed + t}: {label} violated by {-slack:.3e}", dump)
        m_links = [
            (q.wce_map - q.e_star, "e* <= wce(map)"),
            (4.0 * q.e_star - q.wce_map, "wce(map) <= 4 e*"),
        ]
        for slack, label in m_links:
            map_chain.check(slack >= -tol, slack, f"seed {seed + t}: {label} violated by {-slack:.3e}", dump)
        certificate.check(q.fw_gap <= 1e-9, 1e-9 - q.fw_gap,
                          f"seed {seed + t}: duality gap {q.fw_gap:.3e} above tolerance", dump)
    return [chain, map_chain, certificate]


def suite_hgr_equivalence(trials: int, seed: int = 0, tol: float = 1e-8):
    """Closed-form binary HGR against the spectral brute force."""
    report = SuiteReport(name="hgr-closed-form-vs-bruteforce", trials=trials)
    rng = np.random.default_rng(seed)
    for t in range(trials):
        d = int(rng.integers(1, 3))
        m = int(rng.integers(2, 4))
        inst = oracle.random_instance(seed + 7919 * t + 1, d=d, m=m, mode="generic")
        a = hgr_binary(inst)
        b = oracle.hgr_bruteforce(inst)
        gap = abs(a - b)
        report.check(gap <= tol, tol - gap,
                     f"trial {t}: |{a:.12g} - {b:.12g}| = {gap:.3e} > {tol:g}", inst.dump())
    return report


def suite_harmonic_sandwich(pairs: int = 10_000, seed: int = 0, slack: float = 1e-15):
    """ab/(a+b) <= min(a,b) <= 2ab/(a+b) for nonnegative pairs."""
    report = SuiteReport(name="harmonic-mean-sandwich", trials=pairs)
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 1.0, size=pairs)
    b = rng.uniform(0.0, 1.0, size=pairs)
    a[rng.random(pairs) < 0.01] = 0.0
    b[rng.random(pairs) < 0.01] = 0.0
    total = a + b
    harm = np.where(total > 0.0, a * b / np.where(total > 0.0, total, 1.0), 0.0)
    mn = np.minimum(a, b)
    lo = float((mn - harm).min())
    hi = float((2.0 * harm - mn).min())
    report.check(lo >= -slack, lo, f"harmonic mean exceeded min by {-lo:.3e}")
    report.check(hi >= -slack, hi, f"min exceeded twice the harmonic mean by {-hi:.3e}")
    return report


def suite_minimax_lower_bounds(trials: int, seed: int = 0, rules_per_instance: int = 10,
                               tol: float = DEFAULT_TOL):
    """e* never exceeds the worst-case error of any rule."""
    report = SuiteReport(name="minimax-lower-bound", trials=trials * rules_per_instance)
    rng = np.random.default_rng(seed)
    for t in range(trials):
        inst = oracle.random_instance(seed + 31 * t, d=2, m=2, mode="generic")
        cons = build_constraints(from_joint(inst))
        e_star, _ = oracle.solve_estar(cons)
        for _ in range(rules_per_instance):
            rule = DecisionRule(q_delta=rng.uniform(0.0, 1.0, size=inst.n_configs))
            wce = oracle.worst_case_error(cons, rule)
            slack = wce - e_star
            report.check(slack >= -tol, slack,
                         f"seed {seed + 31 * t}: rule beats e* by {-slack:.3e}", inst.dump())
    return report


def suite_theta_minimizes_hgr(trials: int, seed: int = 0, samples: int = 10,
                              tol: float = 1e-5):
    """The harmonic-surrogate optimizer attains the smallest HGR correlation
    among sampled members of the constraint class."""
    report = SuiteReport(name="theta-optimizer-minimizes-hgr", trials=trials * samples)
    for t in range(trials):
        inst = oracle.random_instance(seed + 101 * t, d=2, m=2, mode="generic")
        cons = build_constraints(from_joint(inst))
        sol = oracle.solve_theta(cons, tol=1e-10, max_iter=50_000)
        rho_star = hgr_binary(sol.p_tilde)
        for k, p in enumerate(oracle.sample_feasible(cons, seed + 900 + t, samples)):
            rho = hgr_binary(p)
            slack = rho - rho_star + tol
            report.check(rho_star <= rho + tol, slack,
                         f"seed {seed + 101 * t} sample {k}: optimizer HGR {rho_star:.8f} "
                         f"> sampled {rho:.8f} + {tol:g}", inst.dump())
    return report


def suite_gamma_bound_validity(trials: int, seed: int = 0, samples: int = 8,
                               tol: float = DEFAULT_TOL):
    """sqrt(1 - gamma/(q(1-q))) lower-bounds the HGR correlation of every
    sampled joint matching the marginals."""
    report = SuiteReport(name="gamma-hgr-lower-bound", trials=trials * samples)
    for t in range(trials):
        inst = oracle.random_instance(seed + 211 * t, d=2, m=2, mode="generic")
        marg = from_joint(inst)
        sol = solve_population(marg)
        bound, _ = min_hgr_bound(marg, sol)
        cons = build_constraints(marg)
        for k, p in enumerate(oracle.sample_feasible(cons, seed + 300 + t, samples)):
            rho = hgr_binary(p)
            slack = rho - bound + tol
            report.check(rho >= bound - tol, slack,
                         f"seed {seed + 211 * t} sample {k}: HGR {rho:.8f} below bound "
                         f"{bound:.8f}", inst.dump())
    return report


def suite_model_rule_two_gamma(trials: int, seed: int = 0, tol: float = DEFAULT_TOL):
    """The trained model's randomized rule never exceeds worst-case error
    2 * gamma, separable or not (the clamp preserves the bound)."""
    report = SuiteReport(name="model-rule-two-gamma-bound", trials=trials)
    for t in range(trials):
        inst = oracle.random_instance(seed + 401 * t, d=2, m=2, mode="generic")
        marg = from_joint(inst)
        model = model_from_marginals(marg)
        cons = build_constraints(marg)
        wce = oracle.worst_case_error(cons, model_rule(model, marg.schema))
        slack = model.error_upper_bound() - wce
        report.check(slack >= -tol, slack,
                     f"seed {seed + 401 * t}: rule error {wce:.8f} exceeds "
                     f"2*gamma = {model.error_upper_bound():.8f}", inst.dump())
    return report


def run_all(trials: int, seed: int = 0):
    reports = suite_error_chains(trials, seed)
    reports.append(suite_hgr_equivalence(trials, seed))
    reports.append(suite_harmonic_sandwich(10_000, seed))
    reports.append(suite_minimax_lower_bounds(max(1, trials // 2), seed, rules_per_instance=5))
    reports.append(suite_theta_minimizes_hgr(max(1, trials // 10), seed))
    reports.append(suite_gamma_bound_validity(max(1, trials // 10), seed))
    reports.append(suite_model_rule_two_gamma(max(1, trials // 2), seed))
    return reports
