from __future__ import annotations

import math

import torch

from src.modules.numcore import tensor_lgamma
from .data import TDistForecast


def _require_finite(forecast: TDistForecast, target: torch.Tensor):
    for name, value in (
        ("mean", forecast.mean),
        ("variance", forecast.variance),
        ("df", forecast.df),
        ("target", target),
    ):
        bad = ~torch.isfinite(value)
        if bad.any():
            index = tuple(int(i) for i in bad.nonzero()[0])
            raise ValueError(f"Non-finite {name} at index {index}: {value[index].item()}")


def t_nll_elements(forecast: TDistForecast, target: torch.Tensor) -> torch.Tensor:
    """Per-element negative log-likelihood of `target` under the forecast."""
    if target.shape != forecast.mean.shape:
        raise ValueError(
            f"Target shape {tuple(target.shape)} does not match forecast {tuple(forecast.mean.shape)}"
        )
    _require_finite(forecast, target)
    nu, s2 = forecast.df, forecast.variance
    resid2 = (target - forecast.mean) ** 2
    return (
        (nu + 1.0) / 2.0 * torch.log1p(resid2 / (nu * s2))
        + 0.5 * torch.log(nu * s2 * math.pi)
        + tensor_lgamma(nu / 2.0)
        - tensor_lgamma((nu + 1.0) / 2.0)
    )


def t_nll(forecast: TDistForecast, target: torch.Tensor) -> torch.Tensor:
    """Mean Student-t negative log-likelihood; differentiable in all three heads."""
    return t_nll_elements(forecast, target).mean()


def gaussian_nll(forecast: TDistForecast, target: torch.Tensor) -> torch.Tensor:
    """Mean Gaussian negative log-likelihood with the forecast variance; df is ignored."""
    if target.shape != forecast.mean.shape:
        raise ValueError(
            f"Target shape {tuple(target.shape)} does not match forecast {tuple(forecast.mean.shape)}"
        )
    _require_finite(forecast, target)
    s2 = forecast.variance
    return (0.5 * torch.log(2.0 * math.pi * s2) + (target - forecast.mean) ** 2 / (2.0 * s2)).mean()


LOSSES = {"t_nll": t_nll, "gaussian_nll": gaussian_nll}
