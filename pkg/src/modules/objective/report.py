from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

from src.helpers.json import write_json
from .data import IntervalReport, PointMetrics, TFit


def _clean(value):
    """JSON-safe floats: NaN and infinities become null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_clean(v) for v in value]
    return value


@dataclass
class EvaluationReport:
    overall: PointMetrics
    speed_bins: dict[str, PointMetrics]
    horizons: list[PointMetrics]
    intervals: IntervalReport
    t_fit: TFit | None = None
    condition_attention: dict[str, float | None] = field(default_factory=dict)
    loss: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return _clean(
            {
                "overall": self.overall.to_dict(),
                "speed_bins": {k: v.to_dict() for k, v in self.speed_bins.items()},
                "horizons": [
                    {"step": i + 1, "minutes": 5 * (i + 1), **m.to_dict()} for i, m in enumerate(self.horizons)
                ],
                "intervals": self.intervals.to_dict(),
                "t_fit": None if self.t_fit is None else self.t_fit.to_dict(),
                "condition_attention": dict(self.condition_attention),
                "loss": self.loss,
            }
        )

    def bins_frame(self) -> pd.DataFrame:
        rows = [{"bin": "all", **self.overall.to_dict()}]
        rows += [{"bin": label, **m.to_dict()} for label, m in self.speed_bins.items()]
        return pd.DataFrame(rows, columns=["bin", "rmse", "mae", "mape", "count"])

    def horizons_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "step": i + 1,
                    **m.to_dict(),
                    "mpiw": self.intervals.horizon_mpiw[i] if i < len(self.intervals.horizon_mpiw) else None,
                    "picp": self.intervals.horizon_picp[i] if i < len(self.intervals.horizon_picp) else None,
                }
                for i, m in enumerate(self.horizons)
            ]
        )

    def write(self, directory: Path) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "metrics": directory / "metrics.json",
            "bins": directory / "metrics_by_bin.csv",
            "horizons": directory / "metrics_by_horizon.csv",
        }
        write_json(paths["metrics"], self.to_dict())
        self.bins_frame().to_csv(paths["bins"], index=False, lineterminator="\n")
        self.horizons_frame().to_csv(paths["horizons"], index=False, lineterminator="\n")
        return paths
