"""
Planning Module - fixed-point experiments on tabular MDPs

This module provides:
- Building the experiment MDP from a file or a generator
- Solving for Q* and for the fixed point of the configured operator
- Checking the fixed-point gap against the closed-form performance bound
"""

from typing import Any, Dict, List, Optional

import numpy as np

from config.config_factory import ExperimentConfig, MdpSource
from core.logs import get_logger, log_success
from core.mdp import TabularMdp, chain_mdp, load_mdp, random_mdp
from core.operators import OperatorKind, OperatorSpec
from core.solve import (exact_q_star, fixed_point_gap, greedy_policy, policy_evaluation)
from core.theory import alpha_contraction_range, xi_and_performance_bounds
from modules.report import ResultRecord, emit_svg

logger = get_logger("Plan")


def build_mdp(source: MdpSource) -> TabularMdp:
    """MDP named by the [mdp] section: a file when given, otherwise a generator."""
    if source.file is not None:
        logger.info("Loading MDP from %s", source.file)
        return load_mdp(source.file)
    if source.generator == "chain":
        logger.info("Generating chain MDP (length=%d, slip=%g, gamma=%g)", source.length, source.slip, source.gamma)
        return chain_mdp(source.length, source.slip, source.gamma)
    logger.info("Generating random MDP (%d states, %d actions, branching %d, seed %d)",
                source.n_states, source.n_actions, source.branching, source.mdp_seed)
    return random_mdp(source.n_states, source.n_actions, source.branching, source.mdp_seed,
                      source.gamma, source.r_max)


def gap_bound(spec: OperatorSpec, gamma: float, n: int) -> Optional[float]:
    """Performance bound for operators that sit below max; None when there is none."""
    if spec.kind is OperatorKind.SM2 and spec.alpha >= 0:
        return xi_and_performance_bounds(spec.alpha, spec.omega, gamma, n).performance_bound
    if spec.kind is OperatorKind.MELLOWMAX:
        return xi_and_performance_bounds(0.0, spec.omega, gamma, n).performance_bound
    if spec.kind is OperatorKind.MAX:
        return 0.0
    return None


def solver_slack(tol: float, gamma: float) -> float:
    """Both fixed points are only known to within gamma * tol / (1 - gamma) each."""
    return 2.0 * tol / (1.0 - gamma)


def plan_records(m: TabularMdp, spec: OperatorSpec, tol: float, max_iters: int,
                 params: Dict[str, Any], q_star: Optional[np.ndarray] = None,
                 command: str = "plan"):
    """Solve `m` under `spec` and describe the fixed point relative to Q*."""
    if q_star is None:
        q_star = exact_q_star(m, tol)
    gap, result = fixed_point_gap(m, spec, tol, max_iters, q_star)
    slack = solver_slack(tol, m.gamma)
    bound = gap_bound(spec, m.gamma, m.n_actions)
    records = [
        ResultRecord(command, params, "iterations", result.iterations),
        ResultRecord(command, params, "converged", result.converged),
        ResultRecord(command, params, "final_residual", result.residual, bound=tol),
    ]
    if not result.converged:
        logger.warning("%s did not converge within %d sweeps (residual %.3e)", spec.label, max_iters,
                       result.residual)
    passed = None if bound is None or not result.converged else gap <= bound + slack
    records.append(ResultRecord(command, params, "fixed_point_gap", gap, bound=bound, passed=passed))

    if bound is not None and spec.kind is not OperatorKind.MAX:
        # soft operators sit below max, so their fixed point sits below Q*
        excess = float(np.max(result.q - q_star))
        records.append(ResultRecord(command, params, "fixed_point_excess", excess, bound=slack,
                                    passed=excess <= slack if result.converged else None))
    if spec.kind is OperatorKind.SM2:
        rng = alpha_contraction_range(spec.omega, m.r_max, m.gamma)
        records.append(ResultRecord(command, params, "alpha_max", rng.alpha_max))
        records.append(ResultRecord(command, params, "alpha_min", rng.alpha_min))
        records.append(ResultRecord(command, params, "in_contraction_range", rng.contains(spec.alpha)))

    policy = greedy_policy(result.q)
    optimal = greedy_policy(q_star)
    q_pi = policy_evaluation(m, policy, tol)
    states = np.arange(m.n_states)
    regret = float(np.max(q_star[states, optimal.action_index] - q_pi[states, policy.action_index]))
    records.append(ResultRecord(command, params, "greedy_agreement",
                                float(np.mean(policy.action_index == optimal.action_index))))
    records.append(ResultRecord(command, params, "greedy_policy_regret", regret))
    return records, result


class PlanningManager:
    """Manager class for fixed-point (planning) experiments."""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def plan(self) -> List[ResultRecord]:
        """Solve the configured MDP under the configured operator and compare with Q*."""
        config = self.config
        spec = config.operator
        logger.info("Planning with %s", spec.label)
        m = build_mdp(config.mdp)
        params = dict(config.mdp.describe(), operator=spec.label, tol=config.tol, max_iters=config.max_iters)
        logger.info("Solving for Q* (tol=%g)", config.tol)
        records, result = plan_records(m, spec, config.tol, config.max_iters, params)

        if config.svg is not None:
            residuals = [r if r > 0 else np.finfo(float).tiny for r in result.residual_history]
            if len(residuals) >= 2:
                emit_svg([(spec.label, list(range(1, len(residuals) + 1)), residuals)], config.svg,
                         title="Value iteration residual", xlabel="sweep", ylabel="sup-norm residual",
                         logy=True)
                logger.info("Residual curve written to %s", config.svg)
            else:
                logger.warning("Only %d residual(s) recorded, skipping SVG", len(residuals))
        log_success(logger, "Planning finished after %d sweeps", result.iterations)
        return records
