"""
Sweep Module - grid over (alpha, omega, n_actions, n_agents)

For every grid point the sweep emits the xi bound and the Monte Carlo
reduction under a linear mixer of n_agents equal weights (a single agent
when n_agents = 1). With `[sweep] plan = true` it also solves the
experiment MDP once per (alpha, omega) and checks the fixed-point gap.
Records come out in grid order whatever the worker count.
"""

from typing import List, Tuple

from config.config_factory import ExperimentConfig
from core.errors import SmxError
from core.logs import get_logger, log_success
from core.operators import OperatorSpec
from core.overestimation import ErrorModel, MixerSpec, marl_paired_reduction
from core.parallel import run_chunks
from core.solve import exact_q_star
from core.theory import xi_and_performance_bounds
from modules.config_utils import merge_configs
from modules.planning.planning import build_mdp, plan_records
from modules.report import ResultRecord

logger = get_logger("Sweep")


class SweepManager:
    """Manager class for parameter sweeps."""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def _point_records(self, point: Tuple[float, float, int, int]) -> List[ResultRecord]:
        alpha, omega, n, n_agents = point
        config, mc = self.config, self.config.montecarlo
        params = dict(alpha=alpha, omega=omega, n=n, n_agents=n_agents, epsilon=mc.epsilon,
                      samples=mc.samples, seed=config.seed)
        report = xi_and_performance_bounds(alpha, omega, config.mdp.gamma, n)
        model = ErrorModel(n=n, epsilon=mc.epsilon, samples=mc.samples, seed=config.seed, chunk_size=mc.chunk_size)
        # workers=1 inside a point: the points themselves are fanned out
        reduction = marl_paired_reduction(model, MixerSpec.uniform(n_agents), OperatorSpec.sm2(alpha, omega), 1)
        return [
            ResultRecord("sweep", params, "xi_bound", report.xi_bound),
            ResultRecord("sweep", params, "theta_reduction", reduction.reduction_mean,
                         std_error=reduction.std_error, bound=reduction.bound, passed=reduction.within_bound),
        ]

    def sweep(self) -> List[ResultRecord]:
        config, grid = self.config, self.config.sweep
        points = grid.points()
        logger.info("Sweeping %d grid point(s) with %d worker(s)", len(points), config.workers)

        def job(k: int) -> List[ResultRecord]:
            alpha, omega, n, n_agents = points[k]
            try:
                return self._point_records(points[k])
            except SmxError as e:
                raise e.with_context(alpha=alpha, omega=omega, n=n, n_agents=n_agents)

        records = [r for chunk in run_chunks(job, len(points), config.workers) for r in chunk]

        if grid.plan:
            m = build_mdp(config.mdp)
            logger.info("Solving for Q* (tol=%g)", config.tol)
            q_star = exact_q_star(m, config.tol)
            base = dict(config.mdp.describe(), tol=config.tol, max_iters=config.max_iters)
            pairs = [(a, w) for a in grid.alpha for w in grid.omega]

            def plan_job(k: int) -> List[ResultRecord]:
                alpha, omega = pairs[k]
                spec = OperatorSpec.sm2(alpha, omega)
                params = merge_configs(base, {"alpha": alpha, "omega": omega, "operator": spec.label})
                try:
                    point_records, _ = plan_records(m, spec, config.tol, config.max_iters, params,
                                                    q_star=q_star, command="sweep")
                except SmxError as e:
                    raise e.with_context(alpha=alpha, omega=omega)
                return point_records

            logger.info("Solving %d fixed point(s)", len(pairs))
            records += [r for chunk in run_chunks(plan_job, len(pairs), config.workers) for r in chunk]

        failed = sum(1 for r in records if r.passed is False)
        if failed:
            logger.warning("%d check(s) failed in the sweep", failed)
        else:
            log_success(logger, "Sweep finished: %d record(s)", len(records))
        return records
