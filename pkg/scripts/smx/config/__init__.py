#!/usr/bin/env python3
"""
Configuration Package

Centralized configuration management for the experiment harness.
"""

from .paths import project_paths
from .config_factory import config_factory, load_config, parse_config, ExperimentConfig

__all__ = ['project_paths', 'config_factory', 'load_config', 'parse_config', 'ExperimentConfig']
