from __future__ import annotations

import numpy as np
import pandas as pd
from scipy import optimize, stats
from scipy.special import gammaln

from src.logger import CustomLogger
from src.modules.numcore import student_t_cdf, student_t_quantiles
from .data import TFit

logger = CustomLogger("objective").get_logger()

MIN_FIT_SAMPLES = 100
DF_BOUNDS = (0.2, 1000.0)
START_DFS = (2.0, 5.0, 30.0)
QQ_POINTS = 200


def _t_negative_log_likelihood(theta: np.ndarray, x: np.ndarray) -> float:
    log_df, loc, log_scale = theta
    df, scale = np.exp(log_df), np.exp(log_scale)
    z2 = ((x - loc) / scale) ** 2
    ll = (
        gammaln((df + 1.0) / 2.0)
        - gammaln(df / 2.0)
        - 0.5 * np.log(df * np.pi)
        - log_scale
        - (df + 1.0) / 2.0 * np.log1p(z2 / df)
    )
    return -float(ll.sum())


def fit_t_errors(errors, qq_points: int = QQ_POINTS) -> TFit:
    """
    Maximum-likelihood location-scale Student-t fit of forecast errors.

    Optimizes (log df, loc, log scale) with L-BFGS-B from several df starts and
    keeps the best. Reports the K-S statistic against the fit and against a
    fitted Gaussian, plus Q-Q pairs (theoretical, sample).

    Errors with zero spread skip the optimizer: scale is 0 and both K-S
    statistics are NaN.

    Raises:
        ValueError: With fewer than 100 finite samples.
    """
    x = np.asarray(errors, dtype=np.float64).ravel()
    x = x[np.isfinite(x)]
    if x.size < MIN_FIT_SAMPLES:
        raise ValueError(f"fit_t_errors needs >= {MIN_FIT_SAMPLES} samples, got {x.size}")

    ordered = np.sort(x)
    picks = np.unique(np.linspace(0, x.size - 1, min(qq_points, x.size)).round().astype(np.int64))

    if ordered[0] == ordered[-1]:
        loc = float(ordered[0])
        logger.warning(f"All {x.size} errors equal {loc}; skipping the Student-t fit")
        qq = np.column_stack([np.full(picks.size, loc), ordered[picks]])
        return TFit(DF_BOUNDS[1], loc, 0.0, float("nan"), float("nan"), qq, int(x.size))

    loc0 = float(np.median(x))
    scale0 = float(stats.median_abs_deviation(x, scale="normal")) or float(np.std(x)) or 1.0
    bounds = [tuple(np.log(DF_BOUNDS)), (None, None), (None, None)]

    best = None
    for df0 in START_DFS:
        result = optimize.minimize(
            _t_negative_log_likelihood,
            x0=np.array([np.log(df0), loc0, np.log(scale0)]),
            args=(x,),
            method="L-BFGS-B",
            bounds=bounds,
        )
        if best is None or result.fun < best.fun:
            best = result
    if not best.success:
        logger.warning(f"Student-t fit did not converge cleanly: {best.message}")

    df, loc, scale = float(np.exp(best.x[0])), float(best.x[1]), float(np.exp(best.x[2]))
    ks = stats.kstest(x, lambda v: student_t_cdf((v - loc) / scale, df)).statistic
    gaussian_ks = stats.kstest(x, "norm", args=(float(x.mean()), float(x.std(ddof=1)))).statistic

    probs = (picks + 0.5) / x.size
    theoretical = loc + scale * student_t_quantiles(probs, np.full(probs.shape, df))
    qq = np.column_stack([theoretical, ordered[picks]])

    logger.info(f"Student-t error fit: df={df:.3f}, loc={loc:.3f}, scale={scale:.3f}, K-S={ks:.4f}")
    return TFit(df, loc, scale, float(ks), float(gaussian_ks), qq, int(x.size))


def error_histogram(errors, fit: TFit | None = None, bins: int = 50) -> pd.DataFrame:
    """Histogram of errors with fitted Student-t and Gaussian densities at bin centers."""
    x = np.asarray(errors, dtype=np.float64).ravel()
    x = x[np.isfinite(x)]
    density, edges = np.histogram(x, bins=bins, density=True)
    counts, _ = np.histogram(x, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    spread = float(x.std(ddof=1)) if x.size > 1 else 0.0
    no_density = np.full(centers.shape, np.nan)

    frame = pd.DataFrame(
        {
            "bin_left": edges[:-1],
            "bin_right": edges[1:],
            "count": counts,
            "density": density,
            "gaussian_density": stats.norm.pdf(centers, x.mean(), spread) if spread > 0 else no_density,
        }
    )
    if fit is not None:
        frame["t_density"] = stats.t.pdf(centers, fit.df, fit.loc, fit.scale) if fit.scale > 0 else no_density
    return frame


def qq_frame(fit: TFit) -> pd.DataFrame:
    return pd.DataFrame(fit.qq, columns=["theoretical", "sample"])
