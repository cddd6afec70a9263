from __future__ import annotations

import itertools
from dataclasses import dataclass, fields
from typing import Any

from src.helpers.errors import ConfigError
from src.helpers.process_manager import ordered_map
from src.logger import CustomLogger
from src.modules.model import MMCAformer, ModelConfig
from .config import TrainConfig
from .record import RunRecord
from .split import DataSplits
from .trainer import train

logger = CustomLogger("training").get_logger()

TRAIN_KEYS = {f.name for f in fields(TrainConfig)}
MODEL_KEYS = {f.name for f in fields(ModelConfig)} - {"num_segments"}


@dataclass
class SweepRun:
    index: int
    params: dict[str, Any]
    record: RunRecord
    rank: int = 0


def grid_points(grid: dict[str, list]) -> list[dict[str, Any]]:
    """
    Cartesian product of the grid in key order.

    Raises:
        ConfigError: On an empty grid, an empty value list or an unknown key.
    """
    if not grid:
        raise ConfigError("Sweep grid is empty")
    for key, values in grid.items():
        if key not in TRAIN_KEYS and key not in MODEL_KEYS:
            raise ConfigError(f"Unknown sweep key {key}")
        if not isinstance(values, (list, tuple)) or len(values) == 0:
            raise ConfigError(f"Sweep key {key} needs a non-empty value list")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _run_point(args) -> RunRecord:
    params, model_config, train_config, splits = args
    model_overrides = {k: v for k, v in params.items() if k in MODEL_KEYS and k not in TRAIN_KEYS}
    train_overrides = {k: v for k, v in params.items() if k in TRAIN_KEYS}
    model = MMCAformer(model_config.with_overrides(**model_overrides))
    return train(model, splits, train_config.with_overrides(**train_overrides)).record


def sweep(
    grid: dict[str, list],
    model_config: ModelConfig,
    train_config: TrainConfig,
    splits: DataSplits,
    workers: int = 1,
) -> list[SweepRun]:
    """Train every grid point and rank by best validation loss (ties by grid order)."""
    points = grid_points(grid)
    logger.info(f"Sweeping {len(points)} configurations on {workers} worker(s)")
    records = ordered_map(_run_point, [(p, model_config, train_config, splits) for p in points], workers)

    runs = [SweepRun(i, p, r) for i, (p, r) in enumerate(zip(points, records))]
    ranked = sorted(runs, key=lambda r: (r.record.best_validation_loss, r.index))
    for rank, run in enumerate(ranked, start=1):
        run.rank = rank
    return ranked
