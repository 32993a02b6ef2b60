"""
Closed-form constants and bounds for the soft operators, plus empirical scanners.

- contraction range of alpha for a given omega and value spread c
- the supremum gap xi between max and sm2 and the resulting fixed-point
  performance bound gamma * xi / (1 - gamma)
- the single-agent and multi-agent (linear mixing) overestimation bounds
- Monte Carlo scans that check the contraction and gap claims numerically

The bound operations only cover alpha >= 0; negative alpha is accepted by the
contraction helpers, whose admissible range extends below zero.
"""
from dataclasses import dataclass
from enum import Enum
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from core.errors import ParameterError
from core.logs import get_logger
from core.operators import OperatorSpec, evaluate
from core.parallel import DEFAULT_CHUNK_SIZE, chunk_rng, chunk_sizes, run_chunks

logger = get_logger("Theory")

VIOLATION_TOLERANCE = 1e-9
MIN_DENOMINATOR = 1e-12


class Regime(Enum):
    ALPHA_GE_OMEGA = "alpha_ge_omega"
    ALPHA_LT_OMEGA = "alpha_lt_omega"


@dataclass(frozen=True)
class ContractionRange:
    """Admissible alpha interval [alpha_min, alpha_max] for value spread c."""
    c: float
    alpha_min: float
    alpha_max: float

    def contains(self, alpha: float) -> bool:
        return self.alpha_min <= alpha <= self.alpha_max


@dataclass(frozen=True)
class BoundReport:
    regime: Regime
    xi_bound: float
    performance_bound: float
    reduction_bound: float


@dataclass(frozen=True)
class MarlBoundReport:
    theta1_low: float
    theta1_high: float
    reduction_high: float
    N: int
    n: int
    l: float
    L: float
    epsilon: float


@dataclass(frozen=True)
class ScanReport:
    violations: int
    worst_ratio: float
    trials: int
    worst_pair: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None


@dataclass(frozen=True)
class XiScanReport:
    empirical_sup: float
    xi_bound: float
    within_bound: bool
    trials: int


def _require(name: str, value, ok: bool, requirement: str) -> None:
    if not ok:
        raise ParameterError(name, value, requirement)


def _check_omega_gamma(omega: float, gamma: float) -> None:
    _require("omega", omega, omega > 0 and math.isfinite(omega), "must be > 0")
    _require("gamma", gamma, 0 <= gamma < 1, "must lie in [0, 1)")


def contraction_range_for_spread(omega: float, c: float) -> ContractionRange:
    """alpha range -omega/(1-e^{-c omega}) <= alpha <= omega/(e^{c omega}-1)."""
    _require("omega", omega, omega > 0 and math.isfinite(omega), "must be > 0")
    _require("c", c, c > 0 and math.isfinite(c), "must be > 0")
    # both ends written with e^{-c omega} so large c*omega cannot overflow
    tail = -math.expm1(-c * omega)
    alpha_max = omega * math.exp(-c * omega) / tail
    alpha_min = -omega / tail
    return ContractionRange(c=c, alpha_min=alpha_min, alpha_max=alpha_max)


def alpha_contraction_range(omega: float, r_max: float, gamma: float) -> ContractionRange:
    """Contraction range with c = 2 r_max / (1 - gamma)."""
    _check_omega_gamma(omega, gamma)
    _require("r_max", r_max, r_max > 0, "must be > 0")
    return contraction_range_for_spread(omega, 2.0 * r_max / (1.0 - gamma))


def in_contraction_range(alpha: float, rng: ContractionRange) -> bool:
    return rng.contains(alpha)


def xi_bound_alpha_ge_omega(omega: float, n: int) -> float:
    return math.log((1 + n) / 2.0) / omega


def xi_bound_alpha_lt_omega(alpha: float, omega: float, n: int) -> float:
    return math.log(n - alpha * (n - 1) / (alpha + omega)) / omega


def xi_and_performance_bounds(alpha: float, omega: float, gamma: float, n: int) -> BoundReport:
    """Supremum gap max - sm2 and the limsup distance to Q* it implies."""
    _require("alpha", alpha, alpha >= 0 and math.isfinite(alpha), "bounds assume alpha >= 0")
    _check_omega_gamma(omega, gamma)
    _require("n", n, int(n) == n and n >= 1, "must be an integer >= 1")
    n = int(n)
    if alpha >= omega:
        regime, xi = Regime.ALPHA_GE_OMEGA, xi_bound_alpha_ge_omega(omega, n)
    else:
        regime, xi = Regime.ALPHA_LT_OMEGA, xi_bound_alpha_lt_omega(alpha, omega, n)
    return BoundReport(regime=regime, xi_bound=xi,
                       performance_bound=gamma * xi / (1.0 - gamma), reduction_bound=xi)


def mellowmax_bounds(omega: float, gamma: float, n: int) -> BoundReport:
    """Mellowmax is sm2 at alpha = 0: xi = log(n) / omega."""
    return xi_and_performance_bounds(0.0, omega, gamma, n)


def envelope_max(alpha: float, omega: float) -> float:
    """Upper envelope of f(x) = e^{omega x} / (e^{(omega+alpha) x} + 1) over x >= 0."""
    _require("alpha", alpha, alpha >= 0, "must be >= 0")
    _require("omega", omega, omega > 0, "must be > 0")
    return omega / (alpha + omega) if alpha < omega else 0.5


def envelope_numeric_max(alpha: float, omega: float, x_max: float = 10.0) -> float:
    """Numerical maximum of the same f over [0, x_max] (bounded Brent search)."""
    _require("alpha", alpha, alpha >= 0, "must be >= 0")
    _require("omega", omega, omega > 0, "must be > 0")

    def f(x: float) -> float:
        return math.exp(omega * x - np.logaddexp(0.0, (omega + alpha) * x))

    result = minimize_scalar(lambda x: -f(x), bounds=(0.0, x_max), method="bounded",
                             options={"xatol": 1e-10})
    return max(f(0.0), f(x_max), f(float(result.x)))


def marl_bounds(epsilon: float, l: float, L: float, N: int, n: int,
                alpha: float, omega: float) -> MarlBoundReport:
    """Overestimation interval for N agents under linear mixing with slopes in [l, L]."""
    _require("epsilon", epsilon, epsilon > 0, "must be > 0")
    _require("l", l, l >= 0, "must be >= 0")
    _require("L", L, L > 0 and L >= l, "must be > 0 and >= l")
    _require("N", N, int(N) == N and N >= 1, "must be an integer >= 1")
    _require("n", n, int(n) == n and n >= 1, "must be an integer >= 1")
    N, n = int(N), int(n)
    factor = epsilon * N * (n - 1) / (n + 1)
    xi = xi_and_performance_bounds(alpha, omega, 0.0, n).xi_bound
    return MarlBoundReport(theta1_low=l * factor, theta1_high=L * factor,
                           reduction_high=L * N * xi, N=N, n=n, l=float(l), L=float(L),
                           epsilon=float(epsilon))


def _pair_ratios(spec: OperatorSpec, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    numerator = np.abs(evaluate(q1, spec) - evaluate(q2, spec))
    return numerator / np.max(np.abs(q1 - q2), axis=-1)


def contraction_scan(alpha: float, omega: float, c: float, n: int, trials: int, seed: int,
                     inject_pairs: Optional[Sequence[Tuple[Sequence[float], Sequence[float]]]] = None,
                     chunk_size: int = DEFAULT_CHUNK_SIZE, workers: Optional[int] = None) -> ScanReport:
    """
    Sample pairs (Q1, Q2) uniformly from [-c/2, c/2]^n and measure
    |sm Q1 - sm Q2| / max_i |Q1_i - Q2_i|.

    Pairs whose denominator is below 1e-12 are redrawn from the same chunk
    generator until none remain. `inject_pairs` are evaluated on top of the
    random trials.
    """
    _require("trials", trials, trials >= 1, "must be >= 1")
    _require("c", c, c > 0, "must be > 0")
    _require("n", n, int(n) == n and n >= 2, "must be an integer >= 2")
    spec = OperatorSpec.sm2(alpha, omega)
    n = int(n)
    sizes = chunk_sizes(trials, chunk_size)

    def job(k: int):
        rng = chunk_rng(seed, k)
        q1 = rng.uniform(-c / 2, c / 2, size=(sizes[k], n))
        q2 = rng.uniform(-c / 2, c / 2, size=(sizes[k], n))
        while True:
            bad = np.max(np.abs(q1 - q2), axis=-1) < MIN_DENOMINATOR
            if not bad.any():
                break
            q1[bad] = rng.uniform(-c / 2, c / 2, size=(int(bad.sum()), n))
            q2[bad] = rng.uniform(-c / 2, c / 2, size=(int(bad.sum()), n))
        ratios = _pair_ratios(spec, q1, q2)
        worst = int(np.argmax(ratios))
        return (int(np.sum(ratios > 1.0 + VIOLATION_TOLERANCE)), float(ratios[worst]),
                (tuple(q1[worst]), tuple(q2[worst])))

    results = run_chunks(job, len(sizes), workers)
    violations = sum(r[0] for r in results)
    worst_ratio, worst_pair = -math.inf, None
    for _, ratio, pair in results:
        if ratio > worst_ratio:
            worst_ratio, worst_pair = ratio, pair

    total = trials
    for first, second in inject_pairs or []:
        q1 = np.asarray(first, dtype=np.float64)
        q2 = np.asarray(second, dtype=np.float64)
        if q1.shape != q2.shape or q1.ndim != 1 or np.max(np.abs(q1 - q2)) < MIN_DENOMINATOR:
            raise ParameterError("inject_pairs", (first, second), "need two distinct vectors of equal length")
        ratio = float(_pair_ratios(spec, q1[None, :], q2[None, :])[0])
        total += 1
        violations += int(ratio > 1.0 + VIOLATION_TOLERANCE)
        if ratio > worst_ratio:
            worst_ratio, worst_pair = ratio, (tuple(q1), tuple(q2))
    logger.debug("contraction scan alpha=%s omega=%s c=%s: %d violations / %d", alpha, omega, c,
                 violations, total)
    return ScanReport(violations=violations, worst_ratio=worst_ratio, trials=total,
                      worst_pair=worst_pair)


def xi_scan(alpha: float, omega: float, n: int, trials: int, seed: int,
            spread: Optional[float] = None) -> XiScanReport:
    """
    Empirical supremum of max(q) - sm(q), compared against xi_bound.

    Uses random vectors with the maximum pinned at 0 and the other entries in
    [-spread, 0], plus the two-level family q = [0, -d, ..., -d] over a
    geometric grid of d (the family where the gap peaks).
    """
    bound = xi_and_performance_bounds(alpha, omega, 0.0, n).xi_bound
    spec = OperatorSpec.sm2(alpha, omega)
    spread = 10.0 / omega if spread is None else spread
    rng = chunk_rng(seed, 0)
    random_q = -rng.uniform(0.0, spread, size=(int(trials), int(n)))
    random_q[:, 0] = 0.0
    gaps: List[np.ndarray] = [-np.asarray(evaluate(random_q, spec))]
    if n > 1:
        d = np.geomspace(1e-4, 1e3, 400) / omega
        family = np.repeat(-d[:, None], int(n), axis=1)
        family[:, 0] = 0.0
        gaps.append(-np.asarray(evaluate(family, spec)))
    sup = float(max(float(np.max(g)) for g in gaps))
    return XiScanReport(empirical_sup=sup, xi_bound=bound,
                        within_bound=sup <= bound + VIOLATION_TOLERANCE, trials=int(trials))
