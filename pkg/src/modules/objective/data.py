from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch


@dataclass
class TDistForecast:
    """
    Per-element location-scale Student-t forecast, each tensor shaped ... × N × F.
    `mean` is in normalized units during training and mph once denormalized.
    """

    mean: torch.Tensor
    variance: torch.Tensor
    df: torch.Tensor

    def __post_init__(self):
        if not (self.mean.shape == self.variance.shape == self.df.shape):
            raise ValueError(
                f"Forecast tensors differ in shape: {tuple(self.mean.shape)}, "
                f"{tuple(self.variance.shape)}, {tuple(self.df.shape)}"
            )

    @property
    def scale(self) -> torch.Tensor:
        return torch.sqrt(self.variance)

    def detach(self) -> TDistForecast:
        return TDistForecast(self.mean.detach(), self.variance.detach(), self.df.detach())

    def to_mph(self, lo: float, hi: float) -> TDistForecast:
        """Undo min-max scaling: the location shifts, the scale stretches by hi - lo."""
        width = hi - lo
        return TDistForecast(self.mean * width + lo, self.variance * width**2, self.df)


@dataclass
class PointMetrics:
    rmse: float
    mae: float
    mape: float
    count: int

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "mae": self.mae, "mape": self.mape, "count": self.count}


@dataclass
class IntervalReport:
    """Interval width (mph) and coverage, overall and per forecast horizon step."""

    alpha: float
    mpiw: float
    picp: float
    horizon_mpiw: list[float] = field(default_factory=list)
    horizon_picp: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.picp <= 1.0:
            raise ValueError(f"PICP must be in [0, 1], got {self.picp}")
        if self.mpiw < 0:
            raise ValueError(f"MPIW must be >= 0, got {self.mpiw}")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "mpiw": self.mpiw,
            "picp": self.picp,
            "horizon_mpiw": list(self.horizon_mpiw),
            "horizon_picp": list(self.horizon_picp),
        }


@dataclass
class TFit:
    """Maximum-likelihood location-scale Student-t fit of forecast errors."""

    df: float
    loc: float
    scale: float
    ks_statistic: float
    gaussian_ks_statistic: float
    qq: np.ndarray
    samples: int

    def to_dict(self) -> dict:
        return {
            "df": self.df,
            "loc": self.loc,
            "scale": self.scale,
            "ks_statistic": self.ks_statistic,
            "gaussian_ks_statistic": self.gaussian_ks_statistic,
            "samples": self.samples,
        }
