"""
Finite MDP model, generators, validation and the YAML file format.

An MDP file is a single YAML document with the top-level fields
n_states, n_actions, gamma, r_max, reward ([s][a]), transition ([s][a][s'])
and initial_dist. Floats are written with Python's repr, which keeps every
bit of the stored double.
"""
from dataclasses import dataclass
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import yaml

from core.errors import MdpValidationError, ParameterError
from core.logs import get_logger

logger = get_logger("MDP")

ROW_SUM_TOLERANCE = 1e-9
CLAMP_BELOW = 1e-15

LEFT, RIGHT = 0, 1

MDP_FIELDS = ("n_states", "n_actions", "gamma", "r_max", "reward", "transition", "initial_dist")


def _frozen(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Finite MDP <S, A, P, R, gamma> with a declared reward bound r_max."""
    n_states: int
    n_actions: int
    transition: np.ndarray
    reward: np.ndarray
    gamma: float
    r_max: float
    initial_dist: np.ndarray

    @classmethod
    def build(cls, transition: Any, reward: Any, gamma: float, r_max: float,
              initial_dist: Optional[Any] = None) -> "TabularMdp":
        """Create an MDP from raw arrays; initial_dist defaults to uniform."""
        transition = _frozen(transition)
        reward = _frozen(reward)
        n_states = int(reward.shape[0]) if reward.ndim >= 1 else 0
        n_actions = int(reward.shape[1]) if reward.ndim >= 2 else 0
        if initial_dist is None:
            initial_dist = np.full(n_states, 1.0 / n_states) if n_states else []
        return cls(n_states=n_states, n_actions=n_actions, transition=transition, reward=reward,
                   gamma=float(gamma), r_max=float(r_max), initial_dist=_frozen(initial_dist))

    @property
    def shape(self):
        return (self.n_states, self.n_actions)

    @property
    def c(self) -> float:
        """Largest possible spread of iterate values, 2 r_max / (1 - gamma)."""
        return 2.0 * self.r_max / (1.0 - self.gamma)

    @property
    def value_bound(self) -> float:
        return self.r_max / (1.0 - self.gamma)


@dataclass(frozen=True, eq=False)
class Policy:
    """Deterministic policy: one action index per state."""
    action_index: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "action_index", np.asarray(self.action_index, dtype=np.int64))

    def is_valid_for(self, m: TabularMdp) -> bool:
        idx = self.action_index
        return idx.shape == (m.n_states,) and bool(np.all((idx >= 0) & (idx < m.n_actions)))

    def __eq__(self, other) -> bool:
        return isinstance(other, Policy) and np.array_equal(self.action_index, other.action_index)


def validate(m: TabularMdp) -> List[str]:
    """Return every invariant breach of `m`; an empty list means the MDP is valid."""
    violations: List[str] = []
    S, A = m.n_states, m.n_actions
    if S < 1 or A < 1:
        violations.append(f"n_states and n_actions must be >= 1 (got {S}, {A})")
        return violations
    if not (isinstance(m.gamma, float) and 0.0 <= m.gamma < 1.0):
        violations.append(f"gamma={m.gamma} outside [0, 1)")
    if not (m.r_max > 0 and math.isfinite(m.r_max)):
        violations.append(f"r_max={m.r_max} must be a finite positive number")
    if m.transition.shape != (S, A, S):
        violations.append(f"transition shape {m.transition.shape} != {(S, A, S)}")
    if m.reward.shape != (S, A):
        violations.append(f"reward shape {m.reward.shape} != {(S, A)}")
    if m.initial_dist.shape != (S,):
        violations.append(f"initial_dist shape {m.initial_dist.shape} != {(S,)}")
    if violations and any("shape" in v for v in violations):
        return violations

    for s in range(S):
        for a in range(A):
            row = m.transition[s, a]
            if not np.all(np.isfinite(row)):
                violations.append(f"transition[{s}][{a}] has non-finite entries")
                continue
            if np.any((row < 0.0) | (row > 1.0)):
                violations.append(f"transition[{s}][{a}] has probabilities outside [0, 1]")
            total = float(np.sum(row))
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                violations.append(f"transition[{s}][{a}] sums to {total!r}, not 1")
            r = m.reward[s, a]
            if not math.isfinite(r):
                violations.append(f"reward[{s}][{a}] is not finite")
            elif abs(r) > m.r_max:
                violations.append(f"reward[{s}][{a}]={r!r} exceeds r_max={m.r_max!r}")
    dist = m.initial_dist
    if not np.all(np.isfinite(dist)) or np.any(dist < 0.0):
        violations.append("initial_dist has negative or non-finite entries")
    elif abs(float(np.sum(dist)) - 1.0) > ROW_SUM_TOLERANCE:
        violations.append(f"initial_dist sums to {float(np.sum(dist))!r}, not 1")
    return violations


def _clean_rows(transition: np.ndarray) -> np.ndarray:
    """Zero out denormal-scale probabilities and renormalize each row."""
    transition = np.where(transition < CLAMP_BELOW, 0.0, transition)
    return transition / transition.sum(axis=-1, keepdims=True)


def _check_common(gamma: float, r_max: float) -> None:
    if not 0.0 <= gamma < 1.0:
        raise ParameterError("gamma", gamma, "must lie in [0, 1)")
    if not (r_max > 0 and math.isfinite(r_max)):
        raise ParameterError("r_max", r_max, "must be > 0")


def random_mdp(n_states: int, n_actions: int, branching: int, seed: int,
               gamma: float, r_max: float) -> TabularMdp:
    """
    GARNET-style random MDP.

    Each (s, a) moves to `branching` distinct successors drawn uniformly,
    with probabilities drawn uniformly from the simplex; rewards are uniform
    in [-r_max, r_max].
    """
    if n_states < 1:
        raise ParameterError("n_states", n_states, "must be >= 1")
    if n_actions < 1:
        raise ParameterError("n_actions", n_actions, "must be >= 1")
    if not 1 <= branching <= n_states:
        raise ParameterError("branching", branching, f"must lie in [1, n_states={n_states}]")
    _check_common(gamma, r_max)
    rng = np.random.default_rng(seed)
    transition = np.zeros((n_states, n_actions, n_states))
    for s in range(n_states):
        for a in range(n_actions):
            successors = rng.choice(n_states, size=branching, replace=False)
            transition[s, a, successors] = rng.dirichlet(np.ones(branching))
    reward = rng.uniform(-r_max, r_max, size=(n_states, n_actions))
    return TabularMdp.build(_clean_rows(transition), reward, gamma, r_max)


def chain_mdp(length: int, slip: float, gamma: float) -> TabularMdp:
    """
    Chain of `length` states with actions LEFT / RIGHT.

    The intended move succeeds with probability 1 - slip, otherwise the agent
    moves the other way (both ends clamp). Only RIGHT at the last state, its
    self-loop, pays reward 1.
    """
    if length < 2:
        raise ParameterError("length", length, "must be >= 2")
    if not 0.0 <= slip < 1.0:
        raise ParameterError("slip", slip, "must lie in [0, 1)")
    _check_common(gamma, 1.0)
    last = length - 1
    transition = np.zeros((length, 2, length))
    for s in range(length):
        right, left = min(s + 1, last), max(s - 1, 0)
        transition[s, RIGHT, right] += 1.0 - slip
        transition[s, RIGHT, left] += slip
        transition[s, LEFT, left] += 1.0 - slip
        transition[s, LEFT, right] += slip
    reward = np.zeros((length, 2))
    reward[last, RIGHT] = 1.0
    return TabularMdp.build(_clean_rows(transition), reward, gamma, 1.0)


def mdp_to_dict(m: TabularMdp) -> Dict[str, Any]:
    return {
        "n_states": m.n_states,
        "n_actions": m.n_actions,
        "gamma": float(m.gamma),
        "r_max": float(m.r_max),
        "reward": m.reward.tolist(),
        "transition": m.transition.tolist(),
        "initial_dist": m.initial_dist.tolist(),
    }


def mdp_from_dict(data: Dict[str, Any], source: str = "<dict>") -> TabularMdp:
    """Build and validate an MDP from its file representation."""
    if not isinstance(data, dict):
        raise MdpValidationError(source, ["document is not a mapping"])
    missing = [f for f in MDP_FIELDS if f not in data]
    unknown = [f for f in data if f not in MDP_FIELDS]
    problems = [f"missing field '{f}'" for f in missing] + [f"unknown field '{f}'" for f in unknown]
    if problems:
        raise MdpValidationError(source, problems)
    try:
        m = TabularMdp.build(data["transition"], data["reward"], float(data["gamma"]),
                             float(data["r_max"]), data["initial_dist"])
    except (TypeError, ValueError) as e:
        raise MdpValidationError(source, [f"malformed array: {e}"])
    violations = validate(m)
    if (m.n_states, m.n_actions) != (data["n_states"], data["n_actions"]):
        violations.insert(0, f"declared shape ({data['n_states']}, {data['n_actions']}) does not "
                             f"match reward table {m.shape}")
    if violations:
        raise MdpValidationError(source, violations)
    return m


def load_mdp(path: Union[str, Path]) -> TabularMdp:
    """Load an MDP file; invalid files raise MdpValidationError listing every violation."""
    path = Path(path)
    logger.debug("loading MDP from %s", path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise MdpValidationError(str(path), ["file not found"])
    except yaml.YAMLError as e:
        raise MdpValidationError(str(path), [f"YAML parse error: {e}"])
    return mdp_from_dict(data, str(path))


def save_mdp(m: TabularMdp, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(mdp_to_dict(m), f, sort_keys=False, default_flow_style=None, width=120)
