"""
Generalized Bellman backups, fixed-point value iteration, policy
extraction/evaluation and tabular Q-learning with swappable target rules.

Q tables are plain float64 arrays of shape (n_states, n_actions).
"""
from dataclasses import dataclass, field
from enum import Enum
import math
from typing import List, Optional, Tuple

import numpy as np

from core.errors import NumericalError, ParameterError, ShapeError
from core.logs import get_logger
from core.mdp import Policy, TabularMdp
from core.operators import OperatorSpec, as_qvector, evaluate

logger = get_logger("Solve")

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10000
# exact references may need ~log(tol)/log(gamma) sweeps at gamma = 0.99
REFERENCE_MAX_ITERS = 200000

# uniform behaviour: for a given seed every target rule sees the same transitions
DEFAULT_EPSILON_SCHEDULE = (1.0, 1.0, 1000)
DEFAULT_SYNC_PERIOD = 200
DEFAULT_BIAS_EVERY = 1000


@dataclass
class SolveResult:
    q: np.ndarray
    iterations: int
    residual_history: List[float]
    converged: bool

    @property
    def residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else math.inf


class TargetKind(Enum):
    MAX = "max_target"
    DOUBLE = "double_target"
    MELLOWMAX = "mellowmax_target"
    SM2 = "sm2_target"
    BOLTZMANN = "boltzmann_target"

    @classmethod
    def from_text(cls, text: str) -> "TargetKind":
        key = text.strip().lower()
        for kind in cls:
            if key in (kind.value, kind.value[:-len("_target")]):
                return kind
        raise ParameterError("rule", text, f"expected one of {[k.value for k in cls]}")


@dataclass(frozen=True)
class TargetRule:
    """How the bootstrap value of the next state is formed from the frozen table."""
    kind: TargetKind
    omega: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        # builds (and so validates) the operator
        self.operator

    @classmethod
    def named(cls, name: str, alpha: Optional[float] = None, omega: Optional[float] = None) -> "TargetRule":
        kind = TargetKind.from_text(name)
        if kind in (TargetKind.MAX, TargetKind.DOUBLE):
            return cls(kind)
        if kind is TargetKind.SM2:
            return cls(kind, omega=omega, alpha=alpha)
        return cls(kind, omega=omega)

    @property
    def operator(self) -> OperatorSpec:
        if self.kind is TargetKind.MELLOWMAX:
            return OperatorSpec.mellowmax(_required(self.omega, "omega"))
        if self.kind is TargetKind.SM2:
            return OperatorSpec.sm2(_required(self.alpha, "alpha"), _required(self.omega, "omega"))
        if self.kind is TargetKind.BOLTZMANN:
            return OperatorSpec.boltzmann(_required(self.omega, "omega"))
        return OperatorSpec.max()

    @property
    def label(self) -> str:
        if self.kind in (TargetKind.MAX, TargetKind.DOUBLE):
            return self.kind.value
        return f"{self.kind.value}[{self.operator.label}]"


def _required(value: Optional[float], name: str) -> float:
    if value is None:
        raise ParameterError(name, value, "required by this target rule")
    return value


@dataclass
class QLearningResult:
    q: np.ndarray
    bias_trace: List[Tuple[int, float]] = field(default_factory=list)
    td_trace: List[Tuple[int, float]] = field(default_factory=list)

    @property
    def terminal_bias(self) -> float:
        return self.bias_trace[-1][1] if self.bias_trace else math.nan


@dataclass
class BiasSummary:
    mean: float
    max: float
    per_state_action: np.ndarray


def _check_table(m: TabularMdp, q: np.ndarray, name: str = "q") -> np.ndarray:
    arr = np.asarray(q, dtype=np.float64)
    if arr.shape != m.shape:
        raise ShapeError(f"{name} has shape {arr.shape}, MDP expects {m.shape}")
    return arr


def generalized_backup(m: TabularMdp, q: np.ndarray, spec: OperatorSpec) -> np.ndarray:
    """out[s][a] = R[s][a] + gamma * sum_s' P[s][a][s'] * op(q[s', :]); q is not modified."""
    q = as_qvector(_check_table(m, q))
    next_values = np.asarray(evaluate(q, spec), dtype=np.float64)
    return m.reward + m.gamma * (m.transition @ next_values)


def _check_solver_args(tol: float, max_iters: int) -> None:
    if not tol > 0:
        raise ParameterError("tol", tol, "must be > 0")
    if max_iters < 1:
        raise ParameterError("max_iters", max_iters, "must be >= 1")


def _iterate(step, q: np.ndarray, tol: float, max_iters: int, what: str) -> SolveResult:
    residuals: List[float] = []
    for k in range(1, max_iters + 1):
        q_next = step(q)
        residual = float(np.max(np.abs(q_next - q)))
        if not math.isfinite(residual):
            raise NumericalError(f"{what} produced a non-finite iterate at sweep {k}")
        residuals.append(residual)
        q = q_next
        if residual <= tol:
            logger.debug("%s converged after %d sweeps (residual %.3e)", what, k, residual)
            return SolveResult(q=q, iterations=k, residual_history=residuals, converged=True)
    logger.debug("%s stopped at max_iters=%d (residual %.3e)", what, max_iters, residuals[-1])
    return SolveResult(q=q, iterations=max_iters, residual_history=residuals, converged=False)


def value_iteration(m: TabularMdp, spec: OperatorSpec, tol: float = DEFAULT_TOL,
                    max_iters: int = DEFAULT_MAX_ITERS, q0: Optional[np.ndarray] = None) -> SolveResult:
    """
    Iterate synchronous backups from q0 until the sup-norm residual is <= tol.

    Hitting max_iters is reported through `converged=False`, not raised.
    """
    _check_solver_args(tol, max_iters)
    if q0 is None:
        q0 = np.zeros(m.shape)
    q0 = as_qvector(_check_table(m, q0, "q0"))
    if np.max(np.abs(q0)) > m.r_max:
        raise ParameterError("q0", float(np.max(np.abs(q0))), f"entries must lie in [-r_max, r_max], r_max={m.r_max}")
    return _iterate(lambda q: generalized_backup(m, q, spec), q0.copy(), tol, max_iters,
                    f"value iteration [{spec.label}]")


def exact_q_star(m: TabularMdp, tol: float = DEFAULT_TOL, max_iters: int = REFERENCE_MAX_ITERS) -> np.ndarray:
    """Optimal action values (standard max backup), the reference for every gap measurement."""
    result = value_iteration(m, OperatorSpec.max(), tol, max_iters)
    if not result.converged:
        raise NumericalError(f"Q* did not converge within {max_iters} sweeps "
                             f"(residual {result.residual:.3e})")
    return result.q


def greedy_policy(q: np.ndarray) -> Policy:
    """Per state the lowest-index maximizing action."""
    return Policy(np.argmax(as_qvector(q), axis=-1))


def policy_evaluation(m: TabularMdp, p: Policy, tol: float = DEFAULT_TOL,
                      max_iters: int = REFERENCE_MAX_ITERS) -> np.ndarray:
    """Q^pi as the fixed point of out = R + gamma * P q[s', p(s')]."""
    _check_solver_args(tol, max_iters)
    if not p.is_valid_for(m):
        raise ParameterError("policy", p.action_index.tolist(), f"needs one action in [0, {m.n_actions}) per state")
    states = np.arange(m.n_states)

    def step(q: np.ndarray) -> np.ndarray:
        return m.reward + m.gamma * (m.transition @ q[states, p.action_index])

    result = _iterate(step, np.zeros(m.shape), tol, max_iters, "policy evaluation")
    if not result.converged:
        raise NumericalError(f"policy evaluation did not converge within {max_iters} sweeps")
    return result.q


def fixed_point_gap(m: TabularMdp, spec: OperatorSpec, tol: float = DEFAULT_TOL,
                    max_iters: int = DEFAULT_MAX_ITERS,
                    q_star: Optional[np.ndarray] = None) -> Tuple[float, SolveResult]:
    """Sup-norm distance between Q* and the fixed point reached under `spec`."""
    if q_star is None:
        q_star = exact_q_star(m, tol)
    result = value_iteration(m, spec, tol, max_iters)
    return float(np.max(np.abs(q_star - result.q))), result


def estimation_bias(q: np.ndarray, q_star: np.ndarray) -> BiasSummary:
    q = np.asarray(q, dtype=np.float64)
    q_star = np.asarray(q_star, dtype=np.float64)
    if q.shape != q_star.shape:
        raise ShapeError(f"q has shape {q.shape}, q_star has shape {q_star.shape}")
    diff = q - q_star
    return BiasSummary(mean=float(np.mean(diff)), max=float(np.max(diff)), per_state_action=diff)


def epsilon_at(step: int, schedule: Tuple[float, float, int]) -> float:
    """Linear decay from start to end over decay_steps, constant afterwards."""
    start, end, decay_steps = schedule
    fraction = min(1.0, step / decay_steps)
    return start + (end - start) * fraction


def _check_qlearning_args(steps, lr, schedule, target_sync_period, bias_every) -> None:
    if steps < 1:
        raise ParameterError("steps", steps, "must be >= 1")
    if not 0 < lr <= 1:
        raise ParameterError("lr", lr, "must lie in (0, 1]")
    start, end, decay_steps = schedule
    for name, value in (("epsilon_start", start), ("epsilon_end", end)):
        if not 0 <= value <= 1:
            raise ParameterError(name, value, "must lie in [0, 1]")
    if decay_steps < 1:
        raise ParameterError("decay_steps", decay_steps, "must be >= 1")
    if target_sync_period < 1:
        raise ParameterError("target_sync_period", target_sync_period, "must be >= 1")
    if bias_every < 1:
        raise ParameterError("bias_every", bias_every, "must be >= 1")


def q_learning(m: TabularMdp, rule: TargetRule, steps: int, lr: float = 0.1,
               epsilon_schedule: Tuple[float, float, int] = DEFAULT_EPSILON_SCHEDULE,
               target_sync_period: int = DEFAULT_SYNC_PERIOD, seed: int = 0,
               bias_every: int = DEFAULT_BIAS_EVERY,
               q_star: Optional[np.ndarray] = None) -> QLearningResult:
    """
    Tabular Q-learning on one continuing trajectory.

    The online table is updated with q[s][a] += lr * (target - q[s][a]); the
    frozen table is a copy of the online table refreshed every
    `target_sync_period` steps. Targets bootstrap from the frozen table:
    max / mellowmax / sm2 / boltzmann apply their operator to the frozen row,
    double_target picks the online argmax and reads the frozen entry.

    bias_trace holds (step, mean(q - Q*)) every `bias_every` steps and at the
    last step; td_trace holds the mean |TD error| over the same windows.
    """
    _check_qlearning_args(steps, lr, epsilon_schedule, target_sync_period, bias_every)
    if q_star is None:
        q_star = exact_q_star(m)
    S, A = m.shape
    rng = np.random.default_rng(seed)
    # one draw each for explore?, random action, next state, per step
    draws = rng.random((steps, 3))
    cumulative = np.cumsum(m.transition, axis=-1)
    reward = m.reward
    gamma = m.gamma
    double = rule.kind is TargetKind.DOUBLE
    spec = rule.operator

    q = np.zeros((S, A))
    frozen = q.copy()
    frozen_values = np.asarray(evaluate(frozen, spec), dtype=np.float64)
    s = int(np.searchsorted(np.cumsum(m.initial_dist), rng.random(), side="right"))
    s = min(s, S - 1)

    result = QLearningResult(q=q)
    td_window = 0.0
    window_len = 0
    for t in range(1, steps + 1):
        explore_u, action_u, next_u = draws[t - 1]
        if explore_u < epsilon_at(t - 1, epsilon_schedule):
            a = min(int(action_u * A), A - 1)
        else:
            a = int(np.argmax(q[s]))
        s_next = min(int(np.searchsorted(cumulative[s, a], next_u, side="right")), S - 1)
        if double:
            bootstrap = frozen[s_next, int(np.argmax(q[s_next]))]
        else:
            bootstrap = frozen_values[s_next]
        td = reward[s, a] + gamma * bootstrap - q[s, a]
        q[s, a] += lr * td
        td_window += abs(td)
        window_len += 1

        if t % target_sync_period == 0:
            frozen = q.copy()
            frozen_values = np.asarray(evaluate(frozen, spec), dtype=np.float64)
        if t % bias_every == 0 or t == steps:
            result.bias_trace.append((t, float(np.mean(q - q_star))))
            result.td_trace.append((t, td_window / window_len))
            td_window, window_len = 0.0, 0
        s = s_next

    if not np.all(np.isfinite(q)):
        raise NumericalError(f"Q-learning with {rule.label} produced non-finite values")
    logger.debug("q-learning %s seed=%d: terminal bias %.4f", rule.label, seed, result.terminal_bias)
    return result
