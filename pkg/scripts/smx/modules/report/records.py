"""
Result records and the CSV result file.

Column order is fixed: command, params, metric, value, std_error, bound,
passed, wall_time. `params` is the full parameter set as `key=value` pairs
joined by ';' and sorted by key. Empty cells mean "not applicable".
"""
import csv
from dataclasses import dataclass, field
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO, Union

from core.errors import SmxError
from modules.config_utils import format_params, format_value, parse_params, parse_value

CSV_COLUMNS = ["command", "params", "metric", "value", "std_error", "bound", "passed", "wall_time"]


@dataclass
class ResultRecord:
    command: str
    params: Dict[str, Any]
    metric: str
    value: Any
    std_error: Optional[float] = None
    bound: Optional[float] = None
    passed: Optional[bool] = None
    wall_time: float = 0.0

    def as_row(self) -> Dict[str, str]:
        return {
            "command": self.command,
            "params": format_params(self.params),
            "metric": self.metric,
            "value": format_value(self.value),
            "std_error": format_value(self.std_error),
            "bound": format_value(self.bound),
            "passed": format_value(self.passed),
            "wall_time": format(self.wall_time, ".6f"),
        }

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "ResultRecord":
        return cls(command=row["command"], params=parse_params(row["params"]), metric=row["metric"],
                   value=parse_value(row["value"]), std_error=parse_value(row["std_error"]),
                   bound=parse_value(row["bound"]), passed=parse_value(row["passed"]),
                   wall_time=float(row["wall_time"] or 0.0))


def _write(records: Iterable[ResultRecord], stream: TextIO) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(record.as_row())


def render_csv(records: Iterable[ResultRecord]) -> str:
    buffer = io.StringIO()
    _write(records, buffer)
    return buffer.getvalue()


def write_csv(records: Iterable[ResultRecord], path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            _write(records, f)
    except OSError as e:
        raise SmxError(f"cannot write results to {path}: {e.strerror or e}")


def read_csv(path: Union[str, Path]) -> List[ResultRecord]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return [ResultRecord.from_row(row) for row in csv.DictReader(f)]
    except OSError as e:
        raise SmxError(f"cannot read results from {path}: {e.strerror or e}")
