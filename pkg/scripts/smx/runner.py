#!/usr/bin/env python3
"""
Experiment Runner - dispatches an ExperimentConfig to the matching manager

The runner owns everything around a command: timing, attaching the command
to errors, and writing the CSV (to `out`, or stdout when no path is set).
"""

import sys
import time
from typing import Callable, Dict, List, Tuple

from config.config_factory import ExperimentConfig
from core.errors import SmxError
from core.logs import get_logger
from modules.bounds import BoundsManager
from modules.learning import LearningManager
from modules.overestimation import OverestimationManager
from modules.planning import PlanningManager
from modules.report import ResultRecord, render_csv, write_csv
from modules.sweep import SweepManager

logger = get_logger("Runner")

# command -> (manager class, method name)
DISPATCH: Dict[str, Tuple[Callable[[ExperimentConfig], object], str]] = {
    "plan": (PlanningManager, "plan"),
    "qlearn": (LearningManager, "qlearn"),
    "overest": (OverestimationManager, "overest"),
    "marl-overest": (OverestimationManager, "marl_overest"),
    "bounds": (BoundsManager, "bounds"),
    "contract": (BoundsManager, "contract"),
    "sweep": (SweepManager, "sweep"),
}


class ExperimentRunner:
    """Runs one experiment command end to end."""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def run(self) -> List[ResultRecord]:
        """Produce the records for the configured command; wall_time is stamped on each."""
        command = self.config.command
        manager_cls, method = DISPATCH[command]
        logger.info("Running '%s'", command)
        started = time.perf_counter()
        try:
            records = getattr(manager_cls(self.config), method)()
        except SmxError as e:
            raise e.with_context(command=command)
        elapsed = time.perf_counter() - started
        for record in records:
            record.wall_time = elapsed
        return records

    def write(self, records: List[ResultRecord]) -> None:
        if self.config.out is None:
            sys.stdout.write(render_csv(records))
            sys.stdout.flush()
            return
        write_csv(records, self.config.out)
        logger.info("Wrote %d record(s) to %s", len(records), self.config.out)

    def execute(self) -> List[ResultRecord]:
        records = self.run()
        self.write(records)
        return records


def failed_checks(records: List[ResultRecord]) -> List[ResultRecord]:
    return [r for r in records if r.passed is False]
