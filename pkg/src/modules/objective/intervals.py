from __future__ import annotations

import numpy as np

from src.modules.numcore import student_t_quantiles
from .data import IntervalReport, TDistForecast


def _numpy(x) -> np.ndarray:
    return x.detach().cpu().numpy() if hasattr(x, "detach") else np.asarray(x, dtype=np.float64)


def intervals(forecast: TDistForecast, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Central 1 - alpha interval of each element's Student-t forecast."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    mean, variance, df = _numpy(forecast.mean), _numpy(forecast.variance), _numpy(forecast.df)
    half = student_t_quantiles(np.full(df.shape, 1.0 - alpha / 2.0), df) * np.sqrt(variance)
    return mean - half, mean + half


def interval_eval(lower, upper, y, alpha: float) -> IntervalReport:
    """MPIW and PICP overall and per horizon step (last axis)."""
    lower, upper, y = np.asarray(lower), np.asarray(upper), np.asarray(y)
    if not (lower.shape == upper.shape == y.shape):
        raise ValueError(f"interval_eval: shapes {lower.shape}, {upper.shape}, {y.shape} differ")
    if np.any(lower > upper):
        raise RuntimeError("Interval lower bound exceeds upper bound")

    width = upper - lower
    inside = (y >= lower) & (y <= upper)
    if y.size == 0:
        return IntervalReport(alpha, 0.0, 0.0)
    return IntervalReport(
        alpha=alpha,
        mpiw=float(width.mean()),
        picp=float(inside.mean()),
        horizon_mpiw=[float(width[..., f].mean()) for f in range(y.shape[-1])],
        horizon_picp=[float(inside[..., f].mean()) for f in range(y.shape[-1])],
    )
