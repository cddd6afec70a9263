from __future__ import annotations

from typing import Sequence

import numpy as np
import pandas as pd

from src.logger import CustomLogger
from .data import Trajectory

logger = CustomLogger("ingest").get_logger()

DEFAULT_STATIONARY_WINDOW_S = 600
DEFAULT_STATIONARY_SPEED_CAP_MPH = 2.0


def longest_stationary_span(
    timestamps: np.ndarray, speeds: np.ndarray, speed_cap: float
) -> int:
    """
    Longest time span (seconds) covered by a run of consecutive points all slower
    than `speed_cap`. A lone slow point spans 0 s.
    """
    slow = speeds < speed_cap
    if not slow.any():
        return -1

    # Run boundaries from the edges of the boolean mask
    edges = np.diff(np.concatenate(([0], slow.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return int((timestamps[ends] - timestamps[starts]).max())


def group_and_clean(
    points: pd.DataFrame,
    stationary_window: int = DEFAULT_STATIONARY_WINDOW_S,
    stationary_speed_cap: float = DEFAULT_STATIONARY_SPEED_CAP_MPH,
) -> list[Trajectory]:
    """
    Group points into time-ordered trajectories and drop stationary journeys.

    Duplicate timestamps inside a journey keep the first occurrence in input order.
    A journey is dropped when a run of consecutive points slower than
    `stationary_speed_cap` spans at least `stationary_window` seconds.
    Single-point journeys are kept. Output is ordered by journey_id.
    """
    if points.empty:
        return []

    ordered = points.sort_values(["journey_id", "timestamp"], kind="mergesort")
    ordered = ordered.drop_duplicates(["journey_id", "timestamp"], keep="first")
    duplicates = len(points) - len(ordered)
    if duplicates:
        logger.debug(f"Dropped {duplicates} duplicate-timestamp points")

    trajectories: list[Trajectory] = []
    stationary = 0
    for journey_id, group in ordered.groupby("journey_id", sort=True):
        timestamps = group["timestamp"].to_numpy(dtype=np.int64)
        speeds = group["speed_mph"].to_numpy(dtype=np.float64)
        if longest_stationary_span(timestamps, speeds, stationary_speed_cap) >= stationary_window:
            stationary += 1
            continue
        trajectories.append(
            Trajectory(
                journey_id=str(journey_id),
                timestamps=timestamps,
                chainage=group["chainage_mi"].to_numpy(),
                heading=group["heading_deg"].to_numpy(),
                speed=speeds,
            )
        )

    if stationary:
        logger.info(f"Excluded {stationary} stationary journeys")
    logger.info(f"Built {len(trajectories)} trajectories")
    return trajectories


def downsample_penetration(
    trajectories: Sequence[Trajectory], keep_fraction: float, seed: int
) -> list[Trajectory]:
    """
    Keep each unique journey independently with probability `keep_fraction`.

    Draws are assigned in sorted journey_id order, so the kept set depends only on
    the journey ids, the fraction and the seed, never on the input order.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")

    journey_ids = sorted({t.journey_id for t in trajectories})
    draws = np.random.default_rng(seed).random(len(journey_ids))
    kept = {jid for jid, u in zip(journey_ids, draws) if u < keep_fraction}

    out = [t for t in trajectories if t.journey_id in kept]
    logger.info(
        f"Penetration downsampling kept {len(kept)}/{len(journey_ids)} journeys "
        f"(keep_fraction={keep_fraction}, seed={seed})"
    )
    return out
