"""
Learning Module - tabular Q-learning with different target rules

This module provides:
- Running every (rule, seed) combination on the experiment MDP
- Terminal estimation bias and TD error per run, and per rule over seeds
- The count of seeds on which max_target overestimates more than sm2_target
- An optional SVG of the mean bias traces
"""

import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.config_factory import ALL_RULES, ExperimentConfig
from core.errors import SmxError
from core.logs import get_logger, log_success
from core.parallel import run_chunks
from core.solve import QLearningResult, TargetKind, TargetRule, exact_q_star, q_learning
from modules.planning.planning import build_mdp
from modules.report import ResultRecord, emit_svg

logger = get_logger("QLearn")

# share of seeds on which max_target must not fall below sm2_target
MIN_WIN_FRACTION = 0.8


def default_rules(alpha: Optional[float], omega: Optional[float]) -> List[str]:
    """Every rule whose temperatures are available."""
    if omega is None:
        return ["max_target", "double_target"]
    if alpha is None:
        return [r for r in ALL_RULES if r != "sm2_target"]
    return list(ALL_RULES)


class LearningManager:
    """Manager class for tabular Q-learning experiments."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        names = config.qlearn.rules or default_rules(config.alpha, config.omega)
        self.rules = [TargetRule.named(name, config.alpha, config.omega) for name in names]

    def qlearn(self) -> List[ResultRecord]:
        """Run every rule on every seed and summarize the estimation bias."""
        config, settings = self.config, self.config.qlearn
        m = build_mdp(config.mdp)
        logger.info("Solving for Q* (tol=%g)", config.tol)
        q_star = exact_q_star(m, config.tol)
        runs = [(rule, seed) for rule in self.rules for seed in settings.seeds]
        schedule = (settings.epsilon_start, settings.epsilon_end, settings.decay_steps)
        logger.info("Running %d Q-learning run(s) of %d steps", len(runs), settings.steps)

        def job(k: int) -> QLearningResult:
            rule, seed = runs[k]
            try:
                return q_learning(m, rule, settings.steps, settings.lr, schedule, settings.target_sync_period,
                                  seed, settings.bias_every, q_star)
            except SmxError as e:
                raise e.with_context(rule=rule.label, seed=seed)

        results = run_chunks(job, len(runs), config.workers)
        base = dict(config.mdp.describe(), steps=settings.steps, lr=settings.lr,
                    epsilon_start=settings.epsilon_start, epsilon_end=settings.epsilon_end,
                    decay_steps=settings.decay_steps, target_sync_period=settings.target_sync_period)
        command = "qlearn"
        records: List[ResultRecord] = []
        terminal: Dict[TargetKind, Dict[int, float]] = {}
        for (rule, seed), result in zip(runs, results):
            params = dict(base, rule=rule.label, seed=seed)
            records.append(ResultRecord(command, params, "terminal_bias", result.terminal_bias))
            records.append(ResultRecord(command, params, "terminal_td_error", result.td_trace[-1][1]))
            terminal.setdefault(rule.kind, {})[seed] = result.terminal_bias

        for rule in self.rules:
            biases = np.array([terminal[rule.kind][seed] for seed in settings.seeds])
            std_error = float(np.std(biases, ddof=1) / math.sqrt(len(biases))) if len(biases) > 1 else None
            records.append(ResultRecord(command, dict(base, rule=rule.label, seeds=len(biases)),
                                        "mean_terminal_bias", float(np.mean(biases)), std_error=std_error))

        if TargetKind.MAX in terminal and TargetKind.SM2 in terminal:
            wins = sum(terminal[TargetKind.MAX][s] >= terminal[TargetKind.SM2][s] for s in settings.seeds)
            required = math.ceil(MIN_WIN_FRACTION * len(settings.seeds))
            records.append(ResultRecord(command, dict(base, seeds=len(settings.seeds)),
                                        "seeds_max_bias_ge_sm2_bias", wins, bound=required,
                                        passed=wins >= required))
            logger.info("max_target bias >= sm2_target bias on %d of %d seed(s)", wins, len(settings.seeds))
            if wins < required:
                logger.warning("Expected at least %d seed(s) with max_target bias >= sm2_target bias", required)

        if config.svg is not None:
            self._write_svg(runs, results)
        log_success(logger, "Q-learning finished (%d runs)", len(runs))
        return records

    def _write_svg(self, runs: List[Tuple[TargetRule, int]], results: List[QLearningResult]) -> None:
        series = []
        for rule in self.rules:
            traces = [r.bias_trace for (rr, _), r in zip(runs, results) if rr.kind is rule.kind]
            steps = [t for t, _ in traces[0]]
            mean_bias = np.mean([[b for _, b in trace] for trace in traces], axis=0)
            series.append((rule.label, steps, mean_bias.tolist()))
        if len(series[0][1]) < 2:
            logger.warning("Bias trace has fewer than 2 points, skipping SVG")
            return
        emit_svg(series, self.config.svg, title="Mean estimation bias", xlabel="step", ylabel="mean(Q - Q*)")
        logger.info("Bias curves written to %s", self.config.svg)
