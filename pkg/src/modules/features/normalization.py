from __future__ import annotations

import numpy as np

from src.helpers.math import map_range
from src.logger import CustomLogger
from .data import MACRO_FIELDS, MICRO_FIELDS, ClipReport, NormStats, WindowSet

logger = CustomLogger("features").get_logger()


def compute_stats(windows: WindowSet) -> NormStats:
    if len(windows) == 0:
        raise ValueError("Cannot compute normalization stats from zero windows")
    macro = windows.macro.reshape(-1, len(MACRO_FIELDS))
    micro = windows.micro.reshape(-1, len(MICRO_FIELDS))
    # Targets are later seg_speed values and share its range
    speeds = np.concatenate([macro[:, 0], windows.targets_mph.ravel()])
    macro_min, macro_max = macro.min(axis=0), macro.max(axis=0)
    macro_min[0], macro_max[0] = speeds.min(), speeds.max()
    return NormStats(
        tuple(macro_min), tuple(macro_max), tuple(micro.min(axis=0)), tuple(micro.max(axis=0))
    )


def _scale(values: np.ndarray, lo, hi, names, report: ClipReport) -> np.ndarray:
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    width = hi - lo
    constant = width == 0
    safe_hi = np.where(constant, lo + 1.0, hi)

    scaled = map_range(values, lo, safe_hi, 0.0, 1.0)
    scaled = np.where(constant, 0.0, scaled)
    out_of_range = (scaled < 0.0) | (scaled > 1.0)
    for k, name in enumerate(names):
        count = int(out_of_range[..., k].sum())
        if count:
            report.counts[name] = report.counts.get(name, 0) + count
    return np.clip(scaled, 0.0, 1.0)


def normalize(
    windows: WindowSet, stats: NormStats | None = None
) -> tuple[WindowSet, NormStats, ClipReport]:
    """
    Min-max scale inputs and targets to [0, 1].

    Without `stats`, they are computed from `windows` (the training split).
    Values outside the stats range are clipped and counted per feature.
    A feature with max == min maps to 0.
    """
    if windows.normalized:
        raise ValueError("Windows are already normalized")
    if stats is None:
        stats = compute_stats(windows)
        for name, lo, hi in zip(
            MACRO_FIELDS + MICRO_FIELDS, stats.macro_min + stats.micro_min, stats.macro_max + stats.micro_max
        ):
            if lo == hi:
                logger.warning(f"Feature {name} is constant ({lo}) over the training split; it maps to 0")

    report = ClipReport()
    speed_lo, speed_hi = stats.speed_range
    out = WindowSet(
        macro=_scale(windows.macro, stats.macro_min, stats.macro_max, MACRO_FIELDS, report),
        micro=_scale(windows.micro, stats.micro_min, stats.micro_max, MICRO_FIELDS, report),
        target=_scale(windows.target[..., None], [speed_lo], [speed_hi], ("target",), report)[..., 0],
        tod_index=windows.tod_index,
        dow_index=windows.dow_index,
        dates=windows.dates,
        raw_target=windows.target.copy(),
        normalized=True,
    )
    if report.total:
        logger.warning(f"Clipped {report.total} values to [0, 1]: {report.counts}")
    return out, stats, report


def denormalize(values, stats: NormStats, feature: str = "seg_speed"):
    """Inverse min-max transform for one feature; seg_speed also covers targets and predictions."""
    if feature in MACRO_FIELDS:
        k = MACRO_FIELDS.index(feature)
        lo, hi = stats.macro_min[k], stats.macro_max[k]
    elif feature in MICRO_FIELDS:
        k = MICRO_FIELDS.index(feature)
        lo, hi = stats.micro_min[k], stats.micro_max[k]
    else:
        raise ValueError(f"Unknown feature {feature}")
    return map_range(values, 0.0, 1.0, lo, hi)


def speed_scale(stats: NormStats) -> float:
    """mph per normalized speed unit."""
    lo, hi = stats.speed_range
    return hi - lo
