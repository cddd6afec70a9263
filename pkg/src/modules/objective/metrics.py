from __future__ import annotations

import numpy as np

from src.helpers.math import Range
from .data import PointMetrics

MAPE_EPSILON_MPH = 1.0

SPEED_BINS = (
    Range(0.0, 20.0),
    Range(20.0, 40.0),
    Range(40.0, 60.0),
    Range(60.0, float("inf")),
)


def point_metrics(y, y_hat, epsilon: float = MAPE_EPSILON_MPH) -> PointMetrics:
    """RMSE, MAE and MAPE (%) in mph; MAPE divides by max(y, epsilon)."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise ValueError(f"point_metrics: shapes {y.shape} and {y_hat.shape} differ")
    if y.size == 0:
        return PointMetrics(float("nan"), float("nan"), float("nan"), 0)

    err = y_hat - y
    return PointMetrics(
        rmse=float(np.sqrt(np.mean(err**2))),
        mae=float(np.mean(np.abs(err))),
        mape=float(np.mean(np.abs(err) / np.maximum(y, epsilon)) * 100.0),
        count=int(y.size),
    )


def metrics_by_speed_bin(y, y_hat, epsilon: float = MAPE_EPSILON_MPH) -> dict[str, PointMetrics]:
    """Point metrics grouped by the observed speed."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    return {b.label: point_metrics(y[b.contains(y)], y_hat[b.contains(y)], epsilon) for b in SPEED_BINS}


def metrics_by_horizon(y, y_hat, epsilon: float = MAPE_EPSILON_MPH) -> list[PointMetrics]:
    """Point metrics per forecast step; the horizon is the last axis."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    return [point_metrics(y[..., f], y_hat[..., f], epsilon) for f in range(y.shape[-1])]
