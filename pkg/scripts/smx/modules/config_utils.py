"""
Configuration Utilities - value formatting shared by the managers and the report writers.
Numbers are written with 15 significant digits; parameter sets are flattened
to a `key=value;key=value` string sorted by key so a CSV row needs no context.
"""
import math
from typing import Any, Dict, Mapping, Optional

import yaml

SIGNIFICANT_DIGITS = 15


def format_value(value: Any) -> str:
    """Render one value for CSV / params output."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, f".{SIGNIFICANT_DIGITS}g")
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(format_value(v) for v in value) + "]"
    if hasattr(value, "item"):
        # numpy scalars
        return format_value(value.item())
    return str(value)


def parse_value(text: str) -> Any:
    """Inverse of format_value for the scalar cases; empty text reads as None."""
    if text == "":
        return None
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    if text.startswith("["):
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError:
            return text
    return text


def format_params(params: Mapping[str, Any]) -> str:
    return ";".join(f"{key}={format_value(params[key])}" for key in sorted(params))


def parse_params(text: str) -> Dict[str, Any]:
    if not text:
        return {}
    params = {}
    for item in text.split(";"):
        key, _, value = item.partition("=")
        params[key] = parse_value(value)
    return params


def merge_configs(base_config: Mapping[str, Any], override_config: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    """
    Recursively merge two mappings with override taking precedence.
    Layers CLI overrides over config sections, and per-point sweep parameters
    over the shared run parameters.
    """
    merged = dict(base_config)
    for key, value in (override_config or {}).items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_configs(merged[key], value)
        else:
            merged[key] = value
    return merged
