"""
Special functions for the Student-t head.

lgamma and digamma come from scipy.special (Lanczos-type rational
approximations accurate to double precision on x > 0). The Student-t CDF uses
the regularized incomplete beta function; the quantile inverts it by bisection.
"""

from __future__ import annotations

import numpy as np
from scipy import special

QUANTILE_TOL = 1e-14
QUANTILE_MAX_ITER = 200


def _positive(name: str, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ValueError(f"{name} requires x > 0, got min {np.nanmin(x) if x.size else x}")
    return x


def lgamma(x):
    out = special.gammaln(_positive("lgamma", x))
    return float(out) if np.ndim(out) == 0 else out


def digamma(x):
    out = special.digamma(_positive("digamma", x))
    return float(out) if np.ndim(out) == 0 else out


def student_t_cdf(x, df):
    """
    CDF of the standard Student-t with `df` degrees of freedom.

    The one-sided tail mass is 0.5 * I_{df/(df+x²)}(df/2, 1/2). Near the
    center it is taken as the complement of I_{x²/(df+x²)}(1/2, df/2); in the
    tails the direct form keeps relative precision far out.
    """
    x = np.asarray(x, dtype=np.float64)
    df = _positive("student_t_cdf df", df)
    x, df = np.broadcast_arrays(x, df)
    x2 = x * x
    center = x2 < df
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(
            center,
            0.5 * (1.0 - special.betainc(0.5, df / 2.0, x2 / (df + x2))),
            0.5 * special.betainc(df / 2.0, 0.5, df / (df + x2)),
        )
    out = np.where(x >= 0, 1.0 - tail, tail)
    return float(out) if out.ndim == 0 else out


def student_t_quantiles(p, df) -> np.ndarray:
    """Element-wise quantiles; brackets are grown until they contain the root."""
    p = np.asarray(p, dtype=np.float64)
    df = _positive("student_t_quantile df", df)
    if np.any(~((p > 0) & (p < 1))):
        raise ValueError("student_t_quantile requires p in (0, 1)")
    p, df = np.broadcast_arrays(p, df)
    p, df = p.astype(np.float64).copy(), df.astype(np.float64).copy()

    hi = np.ones_like(p)
    while np.any(student_t_cdf(hi, df) < p):
        grow = student_t_cdf(hi, df) < p
        hi[grow] *= 2.0
    lo = np.full_like(p, -1.0)
    while np.any(student_t_cdf(lo, df) > p):
        grow = student_t_cdf(lo, df) > p
        lo[grow] *= 2.0

    for _ in range(QUANTILE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        below = student_t_cdf(mid, df) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= QUANTILE_TOL * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def student_t_quantile(p: float, df: float) -> float:
    if p == 0.5:
        return 0.0
    return float(student_t_quantiles(p, df))
