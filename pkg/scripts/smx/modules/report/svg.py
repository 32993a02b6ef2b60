"""
Static line charts written as standalone SVG (matplotlib, Agg backend).

The hash salt is fixed and the date metadata dropped so the same series
always produce the same file.
"""
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.errors import ParameterError  # noqa: E402

Series = Tuple[str, Sequence[float], Sequence[float]]


def emit_svg(series: List[Series], path: Union[str, Path], title: Optional[str] = None,
             xlabel: str = "x", ylabel: str = "y", logy: bool = False) -> None:
    """Plot one polyline per (label, xs, ys) entry, legend in input order."""
    if not series:
        raise ParameterError("series", series, "need at least one curve")
    all_x = []
    for label, xs, ys in series:
        if len(xs) != len(ys):
            raise ParameterError("series", label, "x and y lengths differ")
        if len(xs) < 2:
            raise ParameterError("series", label, "each curve needs at least 2 points")
        all_x.extend(xs)
    if np.ptp(np.asarray(all_x, dtype=np.float64)) == 0:
        raise ParameterError("series", "x", "x range is degenerate (all values equal)")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "smx", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        try:
            for label, xs, ys in series:
                ax.plot(xs, ys, label=label, linewidth=1.4)
            if logy:
                ax.set_yscale("log")
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if title:
                ax.set_title(title)
            # axis limits are exactly the data range
            ax.margins(0)
            ax.grid(True, alpha=0.3)
            ax.legend()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
