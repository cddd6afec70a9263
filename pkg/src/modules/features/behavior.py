from __future__ import annotations

from enum import IntEnum
from typing import Sequence

import numpy as np

from src.modules.ingest import Trajectory

MPH_TO_MS = 0.44704

ACC_MEDIUM_MS2 = 0.45
ACC_HARD_MS2 = 0.89
BRK_MEDIUM_MS2 = 0.45
BRK_HARD_MS2 = 1.19

NO_EVENT = -1


class BehaviorClass(IntEnum):
    """Event classes, in the order of the frequency features."""

    HARD_ACC = 0
    MED_ACC = 1
    LIGHT_ACC = 2
    HARD_BRK = 3
    MED_BRK = 4
    LIGHT_BRK = 5


def acceleration_rates(traj: Trajectory) -> np.ndarray:
    """
    m/s² between each point and its predecessor. Entry 0 and pairs with Δt <= 0 are NaN.
    """
    rates = np.full(len(traj), np.nan)
    if len(traj) < 2:
        return rates
    dt = np.diff(traj.timestamps).astype(np.float64)
    ds = np.diff(traj.speed) * MPH_TO_MS
    valid = dt > 0
    rates[1:][valid] = ds[valid] / dt[valid]
    return rates


def classify_rates(rates: np.ndarray) -> np.ndarray:
    """
    Class code per rate, NO_EVENT for NaN.

    Hard is strictly above its threshold, medium includes both bounds,
    light is below 0.45. A zero rate is a light acceleration.
    """
    rates = np.asarray(rates, dtype=np.float64)
    magnitude = np.abs(rates)
    accel = rates >= 0
    brake = rates < 0
    conditions = [
        accel & (magnitude > ACC_HARD_MS2),
        accel & (magnitude >= ACC_MEDIUM_MS2),
        accel,
        brake & (magnitude > BRK_HARD_MS2),
        brake & (magnitude >= BRK_MEDIUM_MS2),
        brake,
    ]
    choices = [int(c) for c in BehaviorClass]
    return np.select(conditions, choices, default=NO_EVENT).astype(np.int64)


def acceleration_events(traj: Trajectory) -> np.ndarray:
    """Class code of the pair ending at each point (NO_EVENT when there is none)."""
    return classify_rates(acceleration_rates(traj))


def count_events(codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return np.bincount(codes[codes >= 0], minlength=len(BehaviorClass))[: len(BehaviorClass)]


def classify_accelerations(traj: Trajectory) -> np.ndarray:
    """Per-class event counts over the whole trajectory, ordered as BehaviorClass."""
    return count_events(acceleration_events(traj))


def speed_volatility(trajectories: Sequence[Trajectory]) -> float:
    """
    Mean over trajectories of the sample standard deviation of their speeds.
    Trajectories with fewer than two points do not contribute; 0 when none does.
    """
    stds = [float(np.std(t.speed, ddof=1)) for t in trajectories if len(t) >= 2]
    if not stds:
        return 0.0
    return float(np.mean(stds))
