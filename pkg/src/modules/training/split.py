from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from src.logger import CustomLogger
from src.modules.features import WindowSet

logger = CustomLogger("training").get_logger()


@dataclass
class DataSplits:
    train: WindowSet
    validation: WindowSet
    test: WindowSet


def split_by_date(
    windows: WindowSet,
    train_dates: Iterable[dt.date],
    test_dates: Iterable[dt.date],
    validation_fraction: float = 0.10,
) -> DataSplits:
    """
    Assign windows to splits by the date of their first input interval.

    Validation is the trailing `validation_fraction` of the train-date windows in
    chronological order. Windows on neither list are excluded with a warning.

    Raises:
        ValueError: If a date appears in both lists.
    """
    train_set, test_set = set(train_dates), set(test_dates)
    overlap = train_set & test_set
    if overlap:
        raise ValueError(f"Dates in both train and test splits: {sorted(d.isoformat() for d in overlap)}")

    dates = np.array(windows.dates, dtype=object)
    in_train = np.array([d in train_set for d in dates], dtype=bool)
    in_test = np.array([d in test_set for d in dates], dtype=bool)
    excluded = int((~in_train & ~in_test).sum())
    if excluded:
        logger.warning(f"Excluded {excluded} windows whose date is in neither split")

    # Stable sort keeps the within-day order of windows
    train_idx = np.flatnonzero(in_train)
    train_idx = train_idx[np.argsort(dates[train_idx], kind="stable")] if train_idx.size else train_idx
    n_val = int(math.floor(validation_fraction * train_idx.size)) if train_idx.size else 0
    if train_idx.size and n_val == 0:
        n_val = 1 if train_idx.size > 1 else 0

    splits = DataSplits(
        train=windows.subset(train_idx[: train_idx.size - n_val]),
        validation=windows.subset(train_idx[train_idx.size - n_val :]),
        test=windows.subset(np.flatnonzero(in_test)),
    )
    logger.info(
        f"Split windows: train={len(splits.train)}, validation={len(splits.validation)}, test={len(splits.test)}"
    )
    return splits
