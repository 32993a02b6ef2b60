"""
Monte Carlo estimates of the overestimation an aggregation operator adds to
noisy action values, single-agent and with linear (VDN-style) mixing.

By shift invariance the true values are pinned at 0, so every estimate is
E[op(Z)] with Z drawn i.i.d. uniform on [-epsilon, epsilon]. All samplers
with the same (seed, n, N, epsilon, samples) see the same Z, which makes
differences between operators paired (common random numbers).
"""
from dataclasses import dataclass
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ParameterError
from core.logs import get_logger
from core.operators import OperatorKind, OperatorSpec, evaluate
from core.parallel import DEFAULT_CHUNK_SIZE, MomentSums, chunk_rng, chunk_sizes, run_chunks
from core.theory import marl_bounds, mellowmax_bounds, xi_and_performance_bounds

logger = get_logger("Overest")

# half-width of the acceptance window, in standard errors
SE_WIDEN = 3.0


@dataclass(frozen=True)
class ErrorModel:
    n: int
    epsilon: float
    samples: int
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError("n", self.n, "must be an integer >= 1")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ParameterError("epsilon", self.epsilon, "must be > 0")
        if self.samples < 1:
            raise ParameterError("samples", self.samples, "must be >= 1")
        if self.chunk_size < 1:
            raise ParameterError("chunk_size", self.chunk_size, "must be >= 1")


@dataclass(frozen=True)
class MixerSpec:
    """Linear mixer Q_tot = sum_i w_i Q_i; the slopes are the weights themselves."""
    weights: Tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise ParameterError("weights", weights, "need at least one agent")
        if min(weights) < 0 or max(weights) <= 0:
            raise ParameterError("weights", weights, "need 0 <= l <= L with L > 0")

    @classmethod
    def uniform(cls, n_agents: int, weight: float = 1.0) -> "MixerSpec":
        if n_agents < 1:
            raise ParameterError("n_agents", n_agents, "must be >= 1")
        return cls(tuple([weight] * int(n_agents)))

    @property
    def N(self) -> int:
        return len(self.weights)

    @property
    def l(self) -> float:
        return min(self.weights)

    @property
    def L(self) -> float:
        return max(self.weights)


@dataclass(frozen=True)
class ThetaEstimate:
    mean: float
    std_error: float
    samples: int


@dataclass(frozen=True)
class ReductionEstimate:
    reduction_mean: float
    std_error: float
    bound: float
    within_bound: bool
    samples: int


@dataclass(frozen=True)
class ScalingReport:
    """Per-agent overestimation Theta1(N)/N for each N, and its analytic value."""
    rows: List[Tuple[int, float, float]]
    analytic_constant: float

    @property
    def consistent(self) -> bool:
        return all(abs(mean - self.analytic_constant) <= SE_WIDEN * se + 1e-12
                   for _, mean, se in self.rows)


def analytic_theta_max(n: int, epsilon: float) -> float:
    """E[max of n uniform(-eps, eps) errors] = eps (n - 1) / (n + 1)."""
    if n < 1:
        raise ParameterError("n", n, "must be >= 1")
    if not epsilon > 0:
        raise ParameterError("epsilon", epsilon, "must be > 0")
    return epsilon * (n - 1) / (n + 1)


def _draw(model: ErrorModel, k: int, size: int, n_agents: Optional[int]) -> np.ndarray:
    shape = (size, model.n) if n_agents is None else (size, n_agents, model.n)
    return chunk_rng(model.seed, k).uniform(-model.epsilon, model.epsilon, size=shape)


def _estimate(model: ErrorModel, statistic, n_agents: Optional[int], workers: Optional[int]) -> MomentSums:
    sizes = chunk_sizes(model.samples, model.chunk_size)

    def job(k: int) -> MomentSums:
        return MomentSums.of(statistic(_draw(model, k, sizes[k], n_agents)))

    logger.debug("sampling %d draws in %d chunk(s)", model.samples, len(sizes))
    return MomentSums.combine(run_chunks(job, len(sizes), workers))


def _theta(sums: MomentSums) -> ThetaEstimate:
    return ThetaEstimate(mean=sums.mean, std_error=sums.std_error, samples=sums.count)


def sample_theta(model: ErrorModel, spec: OperatorSpec, workers: Optional[int] = None) -> ThetaEstimate:
    """Estimate E[op(Z)], Z ~ U[-eps, eps]^n."""
    return _theta(_estimate(model, lambda z: evaluate(z, spec), None, workers))


def _reduction_bound(spec: OperatorSpec, n: int) -> float:
    if spec.kind is OperatorKind.SM2:
        if spec.alpha < 0:
            raise ParameterError("alpha", spec.alpha, "reduction bounds assume alpha >= 0")
        return xi_and_performance_bounds(spec.alpha, spec.omega, 0.0, n).xi_bound
    if spec.kind is OperatorKind.MELLOWMAX:
        return mellowmax_bounds(spec.omega, 0.0, n).xi_bound
    if spec.kind is OperatorKind.BOLTZMANN:
        return math.nan
    raise ParameterError("operator", spec.label, "paired reduction needs sm2, mellowmax or boltzmann")


def _judge(sums: MomentSums, bound: float, n: int) -> ReductionEstimate:
    mean, se = sums.mean, sums.std_error
    if n == 1:
        # max and op coincide on a single action
        within = True
    elif math.isnan(bound):
        within = mean > 0
    else:
        within = 0 < mean <= bound + SE_WIDEN * se
    return ReductionEstimate(reduction_mean=mean, std_error=se, bound=bound,
                             within_bound=within, samples=sums.count)


def paired_theta_reduction(model: ErrorModel, spec: OperatorSpec,
                           workers: Optional[int] = None) -> ReductionEstimate:
    """E[max(Z) - op(Z)] with both terms evaluated on the same draws."""
    bound = _reduction_bound(spec, model.n)

    def difference(z: np.ndarray) -> np.ndarray:
        return z.max(axis=-1) - evaluate(z, spec)

    return _judge(_estimate(model, difference, None, workers), bound, model.n)


def marl_sample_theta(model: ErrorModel, mixer: MixerSpec, spec: OperatorSpec,
                      workers: Optional[int] = None) -> ThetaEstimate:
    """Estimate E[sum_i w_i op(Z_i)] over N independent agents."""
    weights = np.asarray(mixer.weights)
    return _theta(_estimate(model, lambda z: evaluate(z, spec) @ weights, mixer.N, workers))


def marl_paired_reduction(model: ErrorModel, mixer: MixerSpec, spec: OperatorSpec,
                          workers: Optional[int] = None) -> ReductionEstimate:
    """Theta1 - Theta1_op under common draws, judged against L * N * xi."""
    if spec.kind is not OperatorKind.SM2 and spec.kind is not OperatorKind.MELLOWMAX:
        raise ParameterError("operator", spec.label, "mixed reduction needs sm2 or mellowmax")
    alpha = spec.alpha if spec.kind is OperatorKind.SM2 else 0.0
    if alpha < 0:
        raise ParameterError("alpha", alpha, "reduction bounds assume alpha >= 0")
    bound = marl_bounds(model.epsilon, mixer.l, mixer.L, mixer.N, model.n, alpha, spec.omega).reduction_high
    weights = np.asarray(mixer.weights)

    def difference(z: np.ndarray) -> np.ndarray:
        return (z.max(axis=-1) - evaluate(z, spec)) @ weights

    return _judge(_estimate(model, difference, mixer.N, workers), bound, model.n)


def theta_scaling(model: ErrorModel, n_agents_grid: Sequence[int], weight: float = 1.0,
                  workers: Optional[int] = None) -> ScalingReport:
    """Theta1(N) / N under equal weights for each N, max aggregation."""
    if not n_agents_grid:
        raise ParameterError("n_agents_grid", list(n_agents_grid), "must not be empty")
    rows = []
    for n_agents in n_agents_grid:
        estimate = marl_sample_theta(model, MixerSpec.uniform(n_agents, weight), OperatorSpec.max(), workers)
        rows.append((int(n_agents), estimate.mean / n_agents, estimate.std_error / n_agents))
    return ScalingReport(rows=rows, analytic_constant=weight * analytic_theta_max(model.n, model.epsilon))
