"""
Backup operators - max, mean, Boltzmann, Mellowmax and Soft Mellowmax (SM2).

Every operator maps the action values of one state (a QVector) to a single
number. Internally all of them work on the last axis of an array so that the
solvers and Monte Carlo samplers can evaluate a whole table / batch at once;
the scalar functions below are thin wrappers over `evaluate`.

All exponentials go through log-sum-exp on the max-shifted vector, so entries
up to 1e6 with omega up to 100 never overflow.
"""
from dataclasses import dataclass
from enum import Enum
import math
import re
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp, softmax

from core.errors import DomainError, ParameterError

ArrayLike = Union[Sequence[float], np.ndarray]

# spread below this (relative to max(1, |q|inf)) counts as a constant vector
CONSTANT_SPREAD = 1e-15


class OperatorKind(Enum):
    """Enumeration of supported backup operators."""
    MAX = "max"
    MEAN = "mean"
    BOLTZMANN = "boltzmann"
    MELLOWMAX = "mellowmax"
    SM2 = "sm2"

    @classmethod
    def from_text(cls, text: str) -> "OperatorKind":
        aliases = {
            "max": cls.MAX,
            "mean": cls.MEAN,
            "boltzmann": cls.BOLTZMANN,
            "softmax": cls.BOLTZMANN,
            "mellowmax": cls.MELLOWMAX,
            "mm": cls.MELLOWMAX,
            "sm2": cls.SM2,
            "soft_mellowmax": cls.SM2,
        }
        key = text.strip().lower()
        if key not in aliases:
            raise ParameterError("kind", text, f"expected one of {sorted(aliases)}")
        return aliases[key]


@dataclass(frozen=True)
class OperatorSpec:
    """Tagged choice of backup operator with its temperature parameters."""
    kind: OperatorKind
    omega: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.kind in (OperatorKind.MAX, OperatorKind.MEAN):
            return
        if self.omega is None or not math.isfinite(self.omega):
            raise ParameterError("omega", self.omega, f"{self.kind.value} needs a finite omega")
        if self.kind is OperatorKind.BOLTZMANN:
            if self.omega < 0:
                raise ParameterError("omega", self.omega, "boltzmann requires omega >= 0")
        elif self.omega <= 0:
            raise ParameterError("omega", self.omega, f"{self.kind.value} requires omega > 0")
        if self.kind is OperatorKind.SM2:
            if self.alpha is None or not math.isfinite(self.alpha):
                raise ParameterError("alpha", self.alpha, "sm2 needs a finite alpha")

    @classmethod
    def max(cls) -> "OperatorSpec":
        return cls(OperatorKind.MAX)

    @classmethod
    def mean(cls) -> "OperatorSpec":
        return cls(OperatorKind.MEAN)

    @classmethod
    def boltzmann(cls, omega: float) -> "OperatorSpec":
        return cls(OperatorKind.BOLTZMANN, omega=float(omega))

    @classmethod
    def mellowmax(cls, omega: float) -> "OperatorSpec":
        return cls(OperatorKind.MELLOWMAX, omega=float(omega))

    @classmethod
    def sm2(cls, alpha: float, omega: float) -> "OperatorSpec":
        return cls(OperatorKind.SM2, omega=float(omega), alpha=float(alpha))

    @classmethod
    def parse(cls, text: str) -> "OperatorSpec":
        """Parse 'max', 'mean', 'boltzmann(5)', 'mellowmax(5)' or 'sm2(10, 5)' (alpha first)."""
        match = re.fullmatch(r"\s*([A-Za-z_0-9]+)\s*(?:\(([^)]*)\))?\s*", text)
        if not match:
            raise ParameterError("operator", text, "expected e.g. max, mellowmax(5), sm2(10,5)")
        kind = OperatorKind.from_text(match.group(1))
        args = [float(a) for a in match.group(2).split(",")] if match.group(2) else []
        expected = {OperatorKind.MAX: 0, OperatorKind.MEAN: 0, OperatorKind.BOLTZMANN: 1,
                    OperatorKind.MELLOWMAX: 1, OperatorKind.SM2: 2}[kind]
        if len(args) != expected:
            raise ParameterError("operator", text, f"{kind.value} takes {expected} argument(s)")
        if kind is OperatorKind.SM2:
            return cls.sm2(args[0], args[1])
        if kind is OperatorKind.BOLTZMANN:
            return cls.boltzmann(args[0])
        if kind is OperatorKind.MELLOWMAX:
            return cls.mellowmax(args[0])
        return cls(kind)

    @property
    def label(self) -> str:
        if self.kind is OperatorKind.SM2:
            return f"sm2({self.alpha:g},{self.omega:g})"
        if self.kind in (OperatorKind.BOLTZMANN, OperatorKind.MELLOWMAX):
            return f"{self.kind.value}({self.omega:g})"
        return self.kind.value


def as_qvector(q: ArrayLike) -> np.ndarray:
    """Validate and convert action values; the last axis holds the n >= 1 actions."""
    arr = np.asarray(q, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] < 1:
        raise DomainError(f"action-value vector must have at least one entry, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("action values must be finite (got NaN or inf)")
    return arr


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def lse(q: ArrayLike, beta: float) -> np.ndarray:
    """log sum_i exp(beta * q_i) along the last axis, computed stably."""
    arr = as_qvector(q)
    _check_finite("beta", beta)
    return logsumexp(beta * arr, axis=-1)


def _constant_mask(arr: np.ndarray, top: np.ndarray) -> np.ndarray:
    spread = top - arr.min(axis=-1)
    scale = np.maximum(1.0, np.abs(arr).max(axis=-1))
    return spread < CONSTANT_SPREAD * scale


def _finish(value: np.ndarray, arr: np.ndarray, top: np.ndarray, low: np.ndarray) -> np.ndarray:
    # every operator is a weighted quasi-mean: keep rounding inside [low, max]
    value = np.clip(value, low, top)
    value = np.where(_constant_mask(arr, top), top, value)
    return value[()] if value.ndim == 0 else value


def softmax_weights(q: ArrayLike, alpha: float) -> np.ndarray:
    """Boltzmann weights exp(alpha q_i) / sum_j exp(alpha q_j) along the last axis."""
    arr = as_qvector(q)
    _check_finite("alpha", alpha)
    return softmax(alpha * arr, axis=-1)


def mellowmax(q: ArrayLike, omega: float) -> Union[float, np.ndarray]:
    """(1/omega) * log(mean_i exp(omega q_i))."""
    if not omega > 0:
        raise ParameterError("omega", omega, "mellowmax requires omega > 0")
    arr = as_qvector(q)
    top = arr.max(axis=-1)
    shifted = arr - top[..., None]
    n = arr.shape[-1]
    value = top + (logsumexp(omega * shifted, axis=-1) - math.log(n)) / omega
    return _finish(value, arr, top, arr.mean(axis=-1))


def soft_mellowmax(q: ArrayLike, alpha: float, omega: float) -> Union[float, np.ndarray]:
    """
    Soft Mellowmax: (1/omega) * log(sum_i soft_alpha(q)_i exp(omega q_i)).

    Evaluated as (LSE_{alpha+omega}(q) - LSE_alpha(q)) / omega on the
    max-shifted vector; alpha = 0 reduces to Mellowmax.
    """
    if not omega > 0:
        raise ParameterError("omega", omega, "soft mellowmax requires omega > 0")
    _check_finite("alpha", alpha)
    if alpha == 0:
        return mellowmax(q, omega)
    arr = as_qvector(q)
    top = arr.max(axis=-1)
    shifted = arr - top[..., None]
    value = top + (logsumexp((alpha + omega) * shifted, axis=-1)
                   - logsumexp(alpha * shifted, axis=-1)) / omega
    return _finish(value, arr, top, arr.min(axis=-1))


def boltzmann_value(q: ArrayLike, omega: float) -> Union[float, np.ndarray]:
    """Expected action value under the Boltzmann policy softmax(omega q)."""
    if not omega >= 0:
        raise ParameterError("omega", omega, "boltzmann requires omega >= 0")
    arr = as_qvector(q)
    top = arr.max(axis=-1)
    weights = softmax(omega * arr, axis=-1)
    value = top + np.sum(weights * (arr - top[..., None]), axis=-1)
    return _finish(value, arr, top, arr.min(axis=-1))


def evaluate(values: ArrayLike, spec: OperatorSpec) -> Union[float, np.ndarray]:
    """Apply the operator along the last axis of `values` (one result per row)."""
    kind = spec.kind
    if kind is OperatorKind.MAX:
        arr = as_qvector(values)
        out = arr.max(axis=-1)
    elif kind is OperatorKind.MEAN:
        arr = as_qvector(values)
        out = arr.mean(axis=-1)
    elif kind is OperatorKind.BOLTZMANN:
        return boltzmann_value(values, spec.omega)
    elif kind is OperatorKind.MELLOWMAX:
        return mellowmax(values, spec.omega)
    else:
        return soft_mellowmax(values, spec.alpha, spec.omega)
    return out[()] if out.ndim == 0 else out


def apply_operator(q: ArrayLike, spec: OperatorSpec) -> float:
    """Value of a single state's action-value vector under `spec`."""
    arr = as_qvector(q)
    if arr.ndim != 1:
        raise DomainError(f"apply_operator expects a single vector, got shape {arr.shape}")
    return float(evaluate(arr, spec))


def operator_gradient(q: ArrayLike, spec: OperatorSpec) -> np.ndarray:
    """
    Partial derivatives of the operator w.r.t. each action value.

    The entries always sum to one (shift invariance). Negative entries mean
    the operator is not monotone at q, which is what breaks contraction
    outside the admissible alpha range.
    """
    arr = as_qvector(q)
    if arr.ndim != 1:
        raise DomainError(f"operator_gradient expects a single vector, got shape {arr.shape}")
    n = arr.shape[0]
    kind = spec.kind
    if kind is OperatorKind.MAX:
        grad = np.zeros(n)
        grad[int(np.argmax(arr))] = 1.0
        return grad
    if kind is OperatorKind.MEAN:
        return np.full(n, 1.0 / n)
    if kind is OperatorKind.MELLOWMAX:
        return softmax(spec.omega * arr)
    if kind is OperatorKind.BOLTZMANN:
        weights = softmax(spec.omega * arr)
        value = float(np.dot(weights, arr))
        return weights * (1.0 + spec.omega * (arr - value))
    alpha, omega = spec.alpha, spec.omega
    return ((alpha + omega) * softmax((alpha + omega) * arr) - alpha * softmax(alpha * arr)) / omega
