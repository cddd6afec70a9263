from __future__ import annotations

import numpy as np

from src.logger import CustomLogger
from .data import FrameGrid, WindowSet

logger = CustomLogger("features").get_logger()


def build_windows(grid: FrameGrid, history: int = 12, horizon: int = 12) -> WindowSet:
    """
    Slide history+horizon windows with stride 1 inside each complete day.

    Windows never cross a day boundary. Targets are seg_speed in mph.
    Days with missing values are skipped with a warning.
    """
    steps, n = grid.steps_per_day, grid.num_segments
    span = history + horizon
    if span > steps:
        logger.warning(f"history + horizon = {span} exceeds {steps} steps per day; no windows")
        return WindowSet.empty(history, horizon, n)

    starts = np.arange(steps - span + 1)
    in_steps = starts[:, None] + np.arange(history)[None, :]
    out_steps = starts[:, None] + history + np.arange(horizon)[None, :]

    complete = grid.complete_days()
    macro, micro, target, tod, dow, dates = [], [], [], [], [], []
    for d, day in enumerate(grid.days):
        if not complete[d]:
            logger.warning(f"Skipping incomplete day grid {day.isoformat()}")
            continue
        values = grid.values[d]
        macro.append(values[in_steps, :, :2])
        micro.append(values[in_steps, :, 2:])
        target.append(values[out_steps, :, 0])
        tod.append(in_steps)
        dow.append(np.full_like(in_steps, day.weekday()))
        dates.extend([day] * len(starts))

    if not macro:
        return WindowSet.empty(history, horizon, n)

    windows = WindowSet(
        macro=np.concatenate(macro),
        micro=np.concatenate(micro),
        target=np.concatenate(target),
        tod_index=np.concatenate(tod).astype(np.int64),
        dow_index=np.concatenate(dow).astype(np.int64),
        dates=dates,
    )
    logger.debug(f"Built {len(windows)} windows from {len(macro)} days")
    return windows
