#!/usr/bin/env python3
"""
Configuration Factory

Parses experiment configs and provides ExperimentConfig objects to the runner.

Format: flat `key = value` lines under `[section]` headers, `#` or `;`
comments. Values go through yaml.safe_load, so numbers, booleans and
`[a, b]` lists work; a bare `1, 2, 5` is read as a list.
"""

from dataclasses import dataclass
import math
from pathlib import Path
import re
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import yaml

from core.errors import ConfigError, ParameterError
from core.operators import OperatorKind, OperatorSpec
from core.parallel import DEFAULT_CHUNK_SIZE, default_workers
from modules.config_utils import merge_configs
from .paths import project_paths

COMMANDS = ("plan", "qlearn", "overest", "marl-overest", "bounds", "contract", "sweep")
ALL_RULES = ["max_target", "double_target", "mellowmax_target", "sm2_target", "boltzmann_target"]
DEFAULT_GRID = [1.0, 2.0, 5.0, 10.0, 15.0]

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
_ASSIGNMENT = re.compile(r"^([A-Za-z_][\w-]*)\s*=\s*(.*)$")
_MISSING = object()


# -- value converters -------------------------------------------------------

def _number_text(value: Any) -> Any:
    # YAML 1.1 reads 1e-10 (no dot) as a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    return value


def _int(value: Any) -> int:
    value = _number_text(value)
    if isinstance(value, bool):
        raise ValueError("expected an integer")
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, int):
        return value
    raise ValueError("expected an integer")


def _float(value: Any) -> float:
    value = _number_text(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("expected a number")
    return float(value)


def _text(value: Any) -> str:
    if isinstance(value, (list, dict)) or value is None:
        raise ValueError("expected a single value")
    return str(value)


def _bool(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError("expected true or false")
    return value


def _list_of(convert: Callable[[Any], Any]) -> Callable[[Any], list]:
    def parse(value: Any) -> list:
        items = value if isinstance(value, list) else [value]
        return [convert(v) for v in items]
    return parse


def _pair(value: Any) -> Tuple[List[float], List[float]]:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, list) for v in value)):
        raise ValueError("expected [[q1...], [q2...]]")
    first, second = ([_float(x) for x in v] for v in value)
    if len(first) != len(second):
        raise ValueError("both vectors need the same length")
    return first, second


# section -> key -> (converter, default); _MISSING marks keys without a default
SCHEMA: Dict[str, Dict[str, Tuple[Callable[[Any], Any], Any]]] = {
    "experiment": {
        "command": (_text, _MISSING),
        "seed": (_int, 0),
        "out": (_text, None),
        "svg": (_text, None),
        "workers": (_int, None),
    },
    "operator": {
        "kind": (_text, None),
        "alpha": (_float, None),
        "omega": (_float, None),
    },
    "mdp": {
        "file": (_text, None),
        "generator": (_text, "random"),
        "n_states": (_int, 20),
        "n_actions": (_int, 5),
        "branching": (_int, 3),
        "length": (_int, 5),
        "slip": (_float, 0.0),
        "gamma": (_float, 0.9),
        "r_max": (_float, 1.0),
        "mdp_seed": (_int, None),
    },
    "solve": {
        "tol": (_float, 1e-10),
        "max_iters": (_int, 10000),
    },
    "montecarlo": {
        "samples": (_int, 100000),
        "epsilon": (_float, 1.0),
        "n_actions": (_int, 10),
        "n_agents": (_int, None),
        "weights": (_list_of(_float), None),
        "chunk_size": (_int, DEFAULT_CHUNK_SIZE),
    },
    "contract": {
        "trials": (_int, 10000),
        "n_actions": (_int, 2),
        "c": (_float, None),
        "inject_pair": (_pair, None),
    },
    "qlearn": {
        "steps": (_int, 200000),
        "lr": (_float, 0.1),
        "epsilon_start": (_float, 1.0),
        "epsilon_end": (_float, 1.0),
        "decay_steps": (_int, 1000),
        "target_sync_period": (_int, 200),
        "bias_every": (_int, 1000),
        "seeds": (_list_of(_int), None),
        "rules": (_list_of(_text), None),
    },
    "sweep": {
        "alpha": (_list_of(_float), DEFAULT_GRID),
        "omega": (_list_of(_float), DEFAULT_GRID),
        "n_actions": (_list_of(_int), [10]),
        "n_agents": (_list_of(_int), [1]),
        "plan": (_bool, True),
    },
}


# -- typed configuration ----------------------------------------------------

@dataclass
class MdpSource:
    file: Optional[Path]
    generator: str
    n_states: int
    n_actions: int
    branching: int
    length: int
    slip: float
    gamma: float
    r_max: float
    mdp_seed: int

    def describe(self) -> Dict[str, Any]:
        if self.file is not None:
            return {"mdp": self.file.name}
        if self.generator == "chain":
            return {"mdp": "chain", "length": self.length, "slip": self.slip, "gamma": self.gamma}
        return {"mdp": "random", "n_states": self.n_states, "n_actions": self.n_actions,
                "branching": self.branching, "gamma": self.gamma, "r_max": self.r_max,
                "mdp_seed": self.mdp_seed}


@dataclass
class MonteCarloSettings:
    samples: int
    epsilon: float
    n_actions: int
    weights: List[float]
    chunk_size: int

    @property
    def n_agents(self) -> int:
        return len(self.weights)


@dataclass
class ContractSettings:
    trials: int
    n_actions: int
    c: Optional[float]
    inject_pair: Optional[Tuple[List[float], List[float]]]


@dataclass
class QLearnSettings:
    steps: int
    lr: float
    epsilon_start: float
    epsilon_end: float
    decay_steps: int
    target_sync_period: int
    bias_every: int
    seeds: List[int]
    rules: Optional[List[str]]


@dataclass
class SweepGrid:
    alpha: List[float]
    omega: List[float]
    n_actions: List[int]
    n_agents: List[int]
    plan: bool = True

    def points(self) -> List[Tuple[float, float, int, int]]:
        """Grid points in deterministic order: alpha, omega, n_actions, n_agents."""
        return [(a, w, n, N) for a in self.alpha for w in self.omega
                for n in self.n_actions for N in self.n_agents]


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    out: Optional[Path]
    svg: Optional[Path]
    workers: int
    operator: OperatorSpec
    alpha: Optional[float]
    omega: Optional[float]
    mdp: MdpSource
    tol: float
    max_iters: int
    montecarlo: MonteCarloSettings
    contract: ContractSettings
    qlearn: QLearnSettings
    sweep: SweepGrid


# -- parsing ----------------------------------------------------------------

def _strip_comment(line: str) -> str:
    line = line.strip()
    if line.startswith(("#", ";")):
        return ""
    return re.split(r"\s+#", line, maxsplit=1)[0].strip()


def _parse_value(text: str, line_no: int) -> Any:
    if text == "":
        raise ConfigError("missing value after '='", line_no)
    source = text
    if "," in text and not text.startswith(("[", "{", '"', "'")):
        source = f"[{text}]"
    try:
        return yaml.safe_load(source)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value {text!r}: {e.__class__.__name__}", line_no)


def read_sections(text: str) -> Tuple[Dict[str, Dict[str, Any]], Dict[Tuple[str, str], int]]:
    """Split config text into {section: {key: value}}, remembering line numbers."""
    sections: Dict[str, Dict[str, Any]] = {}
    lines: Dict[Tuple[str, str], int] = {}
    current: Optional[str] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            current = header.group(1).lower()
            if current not in SCHEMA:
                raise ConfigError(f"unknown section [{current}]", line_no)
            sections.setdefault(current, {})
            continue
        assignment = _ASSIGNMENT.match(line)
        if not assignment:
            raise ConfigError(f"malformed line {raw.strip()!r} (expected key = value)", line_no)
        if current is None:
            raise ConfigError(f"key '{assignment.group(1)}' appears before any [section]", line_no)
        key = assignment.group(1).lower()
        if key not in SCHEMA[current]:
            raise ConfigError(f"unknown key '{key}' in [{current}]", line_no)
        if key in sections[current]:
            raise ConfigError(f"duplicate key '{key}' in [{current}]", line_no)
        sections[current][key] = _parse_value(assignment.group(2).strip(), line_no)
        lines[(current, key)] = line_no
    return sections, lines


def _coerced(sections, lines) -> Dict[str, Dict[str, Any]]:
    values: Dict[str, Dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (convert, default) in keys.items():
            if key not in sections.get(section, {}):
                values[section][key] = default
                continue
            try:
                values[section][key] = convert(sections[section][key])
            except ValueError as e:
                raise ConfigError(f"[{section}] {key}: {e}", lines.get((section, key)))
    return values


def _operator(kind: Optional[str], alpha: Optional[float], omega: Optional[float]) -> OperatorSpec:
    if kind is None:
        if alpha is not None:
            kind = "sm2"
        elif omega is not None:
            kind = "mellowmax"
        else:
            kind = "max"
    parsed = OperatorKind.from_text(kind)
    if parsed is OperatorKind.SM2:
        if omega is None:
            raise ParameterError("omega", omega, "sm2 needs omega")
        if alpha is None:
            raise ParameterError("alpha", alpha, "sm2 needs alpha")
        return OperatorSpec.sm2(alpha, omega)
    if parsed in (OperatorKind.MELLOWMAX, OperatorKind.BOLTZMANN):
        if omega is None:
            raise ParameterError("omega", omega, f"{parsed.value} needs omega")
        return OperatorSpec(parsed, omega=omega)
    return OperatorSpec(parsed)


def _positive(name: str, value: Union[int, float]) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(name, value, "must be > 0")


def parse_config(text: str, overrides: Optional[Mapping[Tuple[str, str], Any]] = None) -> ExperimentConfig:
    """
    Parse config text into an ExperimentConfig.

    `overrides` maps (section, key) to a value that replaces whatever the
    text says; None values are ignored, so unset CLI flags fall through.
    """
    sections, lines = read_sections(text)
    layered: Dict[str, Dict[str, Any]] = {}
    for (section, key), value in (overrides or {}).items():
        if value is None:
            continue
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown override [{section}] {key}")
        layered.setdefault(section, {})[key] = value
        lines.pop((section, key), None)
    v = _coerced(merge_configs(sections, layered), lines)

    exp = v["experiment"]
    if exp["command"] is _MISSING:
        raise ConfigError("missing required key 'command' in [experiment]")
    command = exp["command"].strip().lower()
    if command not in COMMANDS:
        raise ConfigError(f"unknown command '{command}', expected one of {', '.join(COMMANDS)}",
                          lines.get(("experiment", "command")))

    op = v["operator"]
    operator = _operator(op["kind"], op["alpha"], op["omega"])

    mdp = v["mdp"]
    mdp_file = None
    if mdp["file"] is not None:
        mdp_file = project_paths.resolve(mdp["file"])
        if not mdp_file.is_file():
            raise ConfigError(f"MDP file not found: {mdp_file}", lines.get(("mdp", "file")))
    if mdp["generator"] not in ("random", "chain"):
        raise ConfigError(f"unknown generator '{mdp['generator']}', expected random or chain",
                          lines.get(("mdp", "generator")))
    if not 0 <= mdp["gamma"] < 1:
        raise ParameterError("gamma", mdp["gamma"], "must lie in [0, 1)")
    _positive("r_max", mdp["r_max"])
    mdp_source = MdpSource(file=mdp_file, mdp_seed=exp["seed"] if mdp["mdp_seed"] is None else mdp["mdp_seed"],
                           **{k: mdp[k] for k in ("generator", "n_states", "n_actions", "branching",
                                                  "length", "slip", "gamma", "r_max")})

    solve = v["solve"]
    _positive("tol", solve["tol"])
    _positive("max_iters", solve["max_iters"])

    mc = v["montecarlo"]
    weights = mc["weights"]
    if weights is None:
        weights = [1.0] * (1 if mc["n_agents"] is None else mc["n_agents"])
    elif mc["n_agents"] is not None and mc["n_agents"] != len(weights):
        raise ConfigError(f"n_agents={mc['n_agents']} but {len(weights)} weight(s) given",
                          lines.get(("montecarlo", "n_agents")))
    if not weights:
        raise ParameterError("n_agents", 0, "must be >= 1")
    for name in ("samples", "epsilon", "n_actions", "chunk_size"):
        _positive(name, mc[name])
    montecarlo = MonteCarloSettings(samples=mc["samples"], epsilon=mc["epsilon"], n_actions=mc["n_actions"],
                                    weights=weights, chunk_size=mc["chunk_size"])

    ct = v["contract"]
    contract = ContractSettings(trials=ct["trials"], n_actions=ct["n_actions"], c=ct["c"],
                                inject_pair=ct["inject_pair"])

    ql = v["qlearn"]
    qlearn = QLearnSettings(seeds=ql["seeds"] or [exp["seed"]], rules=ql["rules"] or None,
                            **{k: ql[k] for k in ("steps", "lr", "epsilon_start", "epsilon_end",
                                                  "decay_steps", "target_sync_period", "bias_every")})

    sw = v["sweep"]
    for key in ("alpha", "omega", "n_actions", "n_agents"):
        if not sw[key]:
            raise ConfigError(f"empty sweep grid '{key}'", lines.get(("sweep", key)))
    sweep = SweepGrid(**sw)

    # outputs are relative to the working directory
    out = Path(exp["out"]) if exp["out"] else None
    svg = Path(exp["svg"]) if exp["svg"] else None
    workers = default_workers() if exp["workers"] is None else exp["workers"]
    _positive("workers", workers)

    return ExperimentConfig(command=command, seed=exp["seed"], out=out, svg=svg, workers=workers,
                            operator=operator, alpha=op["alpha"], omega=op["omega"], mdp=mdp_source,
                            tol=solve["tol"], max_iters=solve["max_iters"], montecarlo=montecarlo,
                            contract=contract, qlearn=qlearn, sweep=sweep)


def load_config(path: Union[str, Path],
                overrides: Optional[Mapping[Tuple[str, str], Any]] = None) -> ExperimentConfig:
    path = project_paths.resolve(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    return parse_config(text, overrides)


class ConfigFactory:
    """Factory for experiment configuration objects."""

    @staticmethod
    def create_experiment_config(command: Optional[str] = None, config_path: Optional[Union[str, Path]] = None,
                                 overrides: Optional[Mapping[Tuple[str, str], Any]] = None) -> ExperimentConfig:
        """Config file (if any) + overrides; `command` from the CLI wins over the file."""
        merged = dict(overrides or {})
        if command is not None:
            merged[("experiment", "command")] = command
        if config_path is not None:
            return load_config(config_path, merged)
        return parse_config("", merged)


# Global factory instance
config_factory = ConfigFactory()
