"""
Overestimation Module - Monte Carlo overestimation experiments

This module provides:
- `overest`: single-agent overestimation of max against its analytic value,
  and the paired reduction of the configured soft operator
- `marl_overest`: the same under a linear mixer over N agents, plus the
  per-agent scaling check over N in {1, 2, 4, 8}
"""

from typing import Any, Dict, List

from config.config_factory import ExperimentConfig
from core.logs import get_logger, log_success
from core.operators import OperatorKind, OperatorSpec
from core.overestimation import (SE_WIDEN, ErrorModel, MixerSpec, analytic_theta_max, marl_paired_reduction,
                                 marl_sample_theta, paired_theta_reduction, sample_theta, theta_scaling)
from core.theory import marl_bounds
from modules.bounds.bounds import sm2_parameters
from modules.report import ResultRecord

logger = get_logger("Overest")

SCALING_GRID = [1, 2, 4, 8]
PAIRED_KINDS = (OperatorKind.SM2, OperatorKind.MELLOWMAX, OperatorKind.BOLTZMANN)


def within(value: float, low: float, high: float, std_error: float) -> bool:
    slack = SE_WIDEN * std_error + 1e-12
    return low - slack <= value <= high + slack


class OverestimationManager:
    """Manager class for the Monte Carlo overestimation commands."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        mc = config.montecarlo
        self.model = ErrorModel(n=mc.n_actions, epsilon=mc.epsilon, samples=mc.samples, seed=config.seed,
                                chunk_size=mc.chunk_size)

    def _params(self, **extra: Any) -> Dict[str, Any]:
        model = self.model
        return dict(n=model.n, epsilon=model.epsilon, samples=model.samples, seed=model.seed, **extra)

    def overest(self) -> List[ResultRecord]:
        """Theta of max vs. its analytic value, Theta of the operator, paired reduction."""
        model, spec, workers = self.model, self.config.operator, self.config.workers
        command = "overest"
        logger.info("Sampling %d error vectors (n=%d, epsilon=%g)", model.samples, model.n, model.epsilon)

        analytic = analytic_theta_max(model.n, model.epsilon)
        theta_max = sample_theta(model, OperatorSpec.max(), workers)
        records = [ResultRecord(command, self._params(operator="max"), "theta", theta_max.mean,
                                std_error=theta_max.std_error, bound=analytic,
                                passed=within(theta_max.mean, analytic, analytic, theta_max.std_error))]

        if spec.kind is not OperatorKind.MAX:
            theta_op = sample_theta(model, spec, workers)
            records.append(ResultRecord(command, self._params(operator=spec.label), "theta", theta_op.mean,
                                        std_error=theta_op.std_error))
        if spec.kind in PAIRED_KINDS:
            reduction = paired_theta_reduction(model, spec, workers)
            records.append(ResultRecord(command, self._params(operator=spec.label), "theta_reduction",
                                        reduction.reduction_mean, std_error=reduction.std_error,
                                        bound=reduction.bound, passed=reduction.within_bound))
            logger.info("Reduction %s: %.6g +- %.2g (bound %.6g)", spec.label, reduction.reduction_mean,
                        reduction.std_error, reduction.bound)
        log_success(logger, "Theta(max) = %.6g +- %.2g, analytic %.6g", theta_max.mean, theta_max.std_error,
                    analytic)
        return records

    def marl_overest(self) -> List[ResultRecord]:
        """Mixed overestimation against its interval, paired reduction and per-agent scaling."""
        config, model, spec, workers = self.config, self.model, self.config.operator, self.config.workers
        mixer = MixerSpec(tuple(config.montecarlo.weights))
        command = "marl-overest"
        params = self._params(n_agents=mixer.N, weights=list(mixer.weights))
        logger.info("Sampling %d joint draws for %d agent(s)", model.samples, mixer.N)

        # alpha/omega only shape the reduction bound; the max interval does not use them
        alpha, omega = sm2_parameters(spec) if spec.kind in (OperatorKind.SM2, OperatorKind.MELLOWMAX) else (0.0, 1.0)
        interval = marl_bounds(model.epsilon, mixer.l, mixer.L, mixer.N, model.n, alpha, omega)
        theta = marl_sample_theta(model, mixer, OperatorSpec.max(), workers)
        records = [
            ResultRecord(command, dict(params, operator="max"), "theta1", theta.mean, std_error=theta.std_error,
                         bound=interval.theta1_high,
                         passed=within(theta.mean, interval.theta1_low, interval.theta1_high, theta.std_error)),
            ResultRecord(command, params, "theta1_low", interval.theta1_low),
        ]
        if spec.kind in (OperatorKind.SM2, OperatorKind.MELLOWMAX):
            reduction = marl_paired_reduction(model, mixer, spec, workers)
            records.append(ResultRecord(command, dict(params, operator=spec.label), "theta1_reduction",
                                        reduction.reduction_mean, std_error=reduction.std_error,
                                        bound=reduction.bound, passed=reduction.within_bound))

        logger.info("Checking per-agent scaling over N in %s", SCALING_GRID)
        scaling = theta_scaling(model, SCALING_GRID, 1.0, workers)
        for n_agents, per_agent, std_error in scaling.rows:
            records.append(ResultRecord(command, self._params(n_agents=n_agents, weight=1.0, operator="max"),
                                        "theta1_per_agent", per_agent, std_error=std_error,
                                        bound=scaling.analytic_constant,
                                        passed=within(per_agent, scaling.analytic_constant,
                                                      scaling.analytic_constant, std_error)))
        log_success(logger, "Theta1 = %.6g +- %.2g in [%.6g, %.6g]", theta.mean, theta.std_error,
                    interval.theta1_low, interval.theta1_high)
        return records
