#!/usr/bin/env python3
"""
Project Path Configuration

Centralized path management for the experiment harness.
Relative paths in experiment configs resolve against the project root.
"""

import os
from pathlib import Path
from typing import Union

from dotenv import load_dotenv


class ProjectPaths:
    """Centralized project path management."""

    def __init__(self):
        self.project_root = self._get_project_root()
        self.experiment_configs_dir = self.project_root / "experiment_configs"

    def _get_project_root(self) -> Path:
        """Get project root directory."""
        load_dotenv()
        env_root = os.getenv('SMX_PROJECT_ROOT')
        if env_root:
            return Path(env_root)

        # this file lives at scripts/smx/config/paths.py
        return Path(__file__).resolve().parents[3]

    def resolve(self, path: Union[str, Path]) -> Path:
        """
        Resolve an input file: absolute, then relative to the working directory,
        the experiment_configs directory and finally the project root.
        """
        path = Path(path).expanduser()
        if path.is_absolute() or path.exists():
            return path
        shipped = self.experiment_configs_dir / path
        if shipped.exists():
            return shipped
        return self.project_root / path


# Global instance for easy access
project_paths = ProjectPaths()
