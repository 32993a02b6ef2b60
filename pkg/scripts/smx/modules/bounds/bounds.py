"""
Bounds Module - closed-form constants and their numerical checks

This module provides:
- `bounds`: contraction range, xi / performance bounds, multi-agent interval,
  each closed form paired with a numerical cross-check
- `contract`: Monte Carlo scan of the contraction ratio, optionally with
  hand-picked pairs injected
"""

from typing import Any, Dict, List, Tuple

from config.config_factory import ExperimentConfig
from core.errors import ParameterError
from core.logs import get_logger, log_success
from core.operators import OperatorKind, OperatorSpec
from core.theory import (VIOLATION_TOLERANCE, alpha_contraction_range, contraction_range_for_spread,
                         contraction_scan, envelope_max, envelope_numeric_max, marl_bounds,
                         xi_and_performance_bounds, xi_scan)
from modules.report import ResultRecord

logger = get_logger("Bounds")

XI_SCAN_TRIALS = 20000


def sm2_parameters(spec: OperatorSpec) -> Tuple[float, float]:
    """(alpha, omega) of an sm2 or mellowmax operator; mellowmax is alpha = 0."""
    if spec.kind is OperatorKind.SM2:
        return spec.alpha, spec.omega
    if spec.kind is OperatorKind.MELLOWMAX:
        return 0.0, spec.omega
    raise ParameterError("operator", spec.label, "needs sm2 (alpha, omega) or mellowmax (omega)")


class BoundsManager:
    """Manager class for the closed-form bound and contraction commands."""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def _params(self, **extra: Any) -> Dict[str, Any]:
        alpha, omega = sm2_parameters(self.config.operator)
        return dict(alpha=alpha, omega=omega, gamma=self.config.mdp.gamma, r_max=self.config.mdp.r_max,
                    **extra)

    def bounds(self) -> List[ResultRecord]:
        """Emit the contraction range and the bound report, with numerical checks."""
        config = self.config
        alpha, omega = sm2_parameters(config.operator)
        gamma, r_max = config.mdp.gamma, config.mdp.r_max
        n, n_agents = config.montecarlo.n_actions, config.montecarlo.n_agents
        params = self._params(n=n)
        command = "bounds"
        logger.info("Computing bounds for alpha=%g omega=%g gamma=%g n=%d", alpha, omega, gamma, n)

        rng = alpha_contraction_range(omega, r_max, gamma)
        records = [
            ResultRecord(command, params, "c", rng.c),
            ResultRecord(command, params, "alpha_min", rng.alpha_min),
            ResultRecord(command, params, "alpha_max", rng.alpha_max),
            ResultRecord(command, params, "in_contraction_range", rng.contains(alpha)),
        ]
        if alpha < 0:
            logger.warning("alpha < 0: xi and performance bounds only cover alpha >= 0")
            return records

        report = xi_and_performance_bounds(alpha, omega, gamma, n)
        records += [
            ResultRecord(command, params, "regime", report.regime.value),
            ResultRecord(command, params, "xi_bound", report.xi_bound),
            ResultRecord(command, params, "performance_bound", report.performance_bound),
            ResultRecord(command, params, "reduction_bound", report.reduction_bound),
        ]

        logger.info("Scanning max - sm2 gap over %d random vectors", XI_SCAN_TRIALS)
        scan = xi_scan(alpha, omega, n, XI_SCAN_TRIALS, config.seed)
        records.append(ResultRecord(command, dict(params, trials=scan.trials, seed=config.seed),
                                    "xi_empirical_sup", scan.empirical_sup, bound=scan.xi_bound,
                                    passed=scan.within_bound))

        closed, numeric = envelope_max(alpha, omega), envelope_numeric_max(alpha, omega)
        records.append(ResultRecord(command, params, "envelope_numeric_max", numeric, bound=closed,
                                    passed=numeric <= closed + VIOLATION_TOLERANCE))

        if n_agents > 1 or config.montecarlo.weights != [1.0]:
            weights = config.montecarlo.weights
            marl = marl_bounds(config.montecarlo.epsilon, min(weights), max(weights), n_agents, n, alpha, omega)
            marl_params = dict(params, n_agents=n_agents, l=marl.l, L=marl.L, epsilon=marl.epsilon)
            records += [
                ResultRecord(command, marl_params, "theta1_low", marl.theta1_low),
                ResultRecord(command, marl_params, "theta1_high", marl.theta1_high),
                ResultRecord(command, marl_params, "marl_reduction_high", marl.reduction_high),
            ]
        log_success(logger, "performance bound %.6g, xi bound %.6g", report.performance_bound, report.xi_bound)
        return records

    def contract(self) -> List[ResultRecord]:
        """Scan |sm Q1 - sm Q2| / |Q1 - Q2|_inf and count ratios above 1."""
        config = self.config
        alpha, omega = sm2_parameters(config.operator)
        settings = config.contract
        c = settings.c if settings.c is not None else 2.0 * config.mdp.r_max / (1.0 - config.mdp.gamma)
        n = settings.n_actions
        params = dict(alpha=alpha, omega=omega, c=c, n=n, trials=settings.trials, seed=config.seed)
        if settings.inject_pair is not None:
            params["inject_pair"] = [list(settings.inject_pair[0]), list(settings.inject_pair[1])]
        command = "contract"

        rng = contraction_range_for_spread(omega, c)
        logger.info("Admissible alpha for c=%g: [%.6g, %.6g]", c, rng.alpha_min, rng.alpha_max)
        # injected pairs may have their own length; each is evaluated on its own
        inject = [settings.inject_pair] if settings.inject_pair is not None else None
        logger.info("Sampling %d pairs in [-c/2, c/2]^%d", settings.trials, n)
        scan = contraction_scan(alpha, omega, c, n, settings.trials, config.seed, inject_pairs=inject,
                                chunk_size=config.montecarlo.chunk_size, workers=config.workers)

        records = [
            ResultRecord(command, params, "alpha_min", rng.alpha_min),
            ResultRecord(command, params, "alpha_max", rng.alpha_max),
            ResultRecord(command, params, "in_contraction_range", rng.contains(alpha)),
            ResultRecord(command, params, "violations", scan.violations, bound=0,
                         passed=scan.violations == 0),
            ResultRecord(command, params, "worst_ratio", scan.worst_ratio, bound=1.0,
                         passed=scan.worst_ratio <= 1.0 + VIOLATION_TOLERANCE),
        ]
        if scan.violations:
            logger.warning("%d of %d pairs expand (worst ratio %.6g)", scan.violations, scan.trials,
                           scan.worst_ratio)
        else:
            log_success(logger, "No expansion in %d pairs (worst ratio %.6g)", scan.trials, scan.worst_ratio)
        return records
