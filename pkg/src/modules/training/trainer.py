from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch

from src.helpers.errors import NonFiniteLossError
from src.logger import CustomLogger
from src.modules.features import WindowSet
from src.modules.model import ForwardOutput, MMCAformer, ModelBatch, batch_targets
from src.modules.objective import LOSSES, TDistForecast
from .config import TrainConfig
from .early_stopping import EarlyStopping
from .record import EpochRecord, RunRecord
from .split import DataSplits

logger = CustomLogger("training").get_logger()


@dataclass
class TrainResult:
    model: MMCAformer
    record: RunRecord


def epoch_order(size: int, seed: int, epoch: int) -> np.ndarray:
    """Batch order for one epoch; depends only on (seed, epoch)."""
    return np.random.default_rng([seed, epoch]).permutation(size)


def _batches(indices: np.ndarray, batch_size: int):
    for start in range(0, len(indices), batch_size):
        yield indices[start : start + batch_size]


def predict(
    model: MMCAformer,
    windows: WindowSet,
    batch_size: int = 32,
    on_batch: Callable[[np.ndarray, ForwardOutput], None] | None = None,
) -> TDistForecast:
    """Inference forecast for every window, W×N×F, in the model's units."""
    model.eval()
    means, variances, dfs = [], [], []
    with torch.no_grad():
        for idx in _batches(np.arange(len(windows)), batch_size):
            out = model(ModelBatch.from_windows(windows, idx), train=False)
            if on_batch is not None:
                on_batch(idx, out)
            means.append(out.forecast.mean)
            variances.append(out.forecast.variance)
            dfs.append(out.forecast.df)
    if not means:
        empty = torch.zeros(0, model.config.num_segments, model.config.horizon, dtype=torch.float64)
        return TDistForecast(empty, empty.clone(), empty.clone())
    return TDistForecast(torch.cat(means), torch.cat(variances), torch.cat(dfs))


def evaluate_loss(model: MMCAformer, windows: WindowSet, loss_name: str = "t_nll", batch_size: int = 32) -> float:
    """Window-weighted mean loss in inference mode."""
    if len(windows) == 0:
        return float("nan")
    loss_fn = LOSSES[loss_name]
    model.eval()
    total = 0.0
    with torch.no_grad():
        for idx in _batches(np.arange(len(windows)), batch_size):
            out = model(ModelBatch.from_windows(windows, idx), train=False)
            total += float(loss_fn(out.forecast, batch_targets(windows, idx))) * len(idx)
    return total / len(windows)


def train(model: MMCAformer, splits: DataSplits, config: TrainConfig) -> TrainResult:
    """
    Adam on the configured loss with early stopping on validation loss.

    The returned model carries the weights of the best validation epoch. With a
    fixed seed the loss trace is reproducible: batch order and dropout masks are
    functions of the seed only.

    Raises:
        NonFiniteLossError: When a training batch produces a NaN or infinite loss.
        ValueError: When the training split is empty.
    """
    train_set, validation_set = splits.train, splits.validation
    if len(train_set) == 0:
        raise ValueError("Training split holds no windows")
    monitor_train = len(validation_set) == 0
    if monitor_train:
        logger.warning("Validation split is empty; early stopping monitors the training loss")

    loss_fn = LOSSES[config.loss]
    model.reseed_dropout(config.seed)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, betas=config.adam_betas, eps=config.adam_eps
    )
    stopper = EarlyStopping(patience=config.early_stop_patience)
    record = RunRecord()

    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        model.train()
        total = 0.0
        order = epoch_order(len(train_set), config.seed, epoch)
        for b, idx in enumerate(_batches(order, config.batch_size)):
            out = model(ModelBatch.from_windows(train_set, idx), train=True)
            loss = loss_fn(out.forecast, batch_targets(train_set, idx))
            value = float(loss.detach())
            if not math.isfinite(value):
                raise NonFiniteLossError(epoch, b, value)

            optimizer.zero_grad()
            loss.backward()
            if config.grad_clip_norm is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip_norm)
            optimizer.step()
            total += value * len(idx)

        train_loss = total / len(train_set)
        if monitor_train:
            validation_loss = train_loss
        else:
            validation_loss = evaluate_loss(model, validation_set, config.loss, config.batch_size)
        record.add(EpochRecord(epoch, train_loss, validation_loss, time.perf_counter() - started))
        logger.debug(f"epoch {epoch}: train={train_loss:.5f} validation={validation_loss:.5f}")

        if stopper(epoch, validation_loss, model):
            record.stopped_early = True
            logger.info(f"Early stop at epoch {epoch}; best epoch {stopper.best_epoch}")
            break

    stopper.restore(model)
    model.eval()
    logger.info(
        f"Trained {len(record.epochs)} epochs, best validation loss {record.best_validation_loss:.5f} "
        f"at epoch {record.best_epoch}"
    )
    return TrainResult(model, record)
