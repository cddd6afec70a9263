from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import torch

from src.logger import CustomLogger
from src.modules.features import (
    ClipReport,
    FrameGrid,
    NormStats,
    WindowSet,
    build_windows,
    compute_stats,
    denormalize,
    extract_frames,
    normalize,
)
from src.modules.ingest import SegmentIndex, group_and_clean
from src.modules.model import (
    ConditionAttention,
    ForwardOutput,
    MMCAformer,
    ScoreAccumulator,
    batch_targets,
    cross_attention_by_condition,
    write_scores,
)
from src.modules.objective import (
    EvaluationReport,
    LOSSES,
    error_histogram,
    fit_t_errors,
    interval_eval,
    intervals,
    metrics_by_horizon,
    metrics_by_speed_bin,
    point_metrics,
    qq_frame,
)
from src.modules.objective.diagnostics import MIN_FIT_SAMPLES
from src.modules.training import DataSplits, RunRecord, predict, split_by_date, train
from .config import EvaluateConfig, ExperimentConfig

logger = CustomLogger("cli").get_logger()

TEST_SHARE = 0.2


def resolve_split_days(exp: ExperimentConfig, days: list[dt.date]) -> tuple[list[dt.date], list[dt.date]]:
    """
    Configured dates when given, otherwise the trailing 20% of days (at least one
    when there are two or more) form the test split.
    """
    if exp.split.train_dates or exp.split.test_dates:
        test = exp.split.test_days()
        train_days = exp.split.train_days() or [d for d in days if d not in set(test)]
        return train_days, test
    ordered = sorted(days)
    n_test = max(1, round(TEST_SHARE * len(ordered))) if len(ordered) >= 2 else 0
    return ordered[: len(ordered) - n_test], ordered[len(ordered) - n_test :]


def window_splits(grid: FrameGrid, exp: ExperimentConfig) -> DataSplits:
    windows = build_windows(grid, exp.features.history, exp.features.horizon)
    train_days, test_days = resolve_split_days(exp, grid.days)
    return split_by_date(windows, train_days, test_days, exp.train.validation_fraction)


@dataclass
class PreparedData:
    grid: FrameGrid
    splits: DataSplits
    stats: NormStats
    clip_report: ClipReport


def prepare(grid: FrameGrid, exp: ExperimentConfig, stats: NormStats | None = None) -> PreparedData:
    """Window, split by date and min-max scale with training-split stats."""
    raw = window_splits(grid, exp)
    if len(raw.train) == 0:
        raise ValueError("No training windows: check the split dates and the day grid")
    if stats is None:
        stats = compute_stats(raw.train)

    report = ClipReport()
    normalized = []
    for part in (raw.train, raw.validation, raw.test):
        out, _, clips = normalize(part, stats)
        for name, count in clips.counts.items():
            report.counts[name] = report.counts.get(name, 0) + count
        normalized.append(out)
    return PreparedData(grid, DataSplits(*normalized), stats, report)


def extract_dataset(
    points: pd.DataFrame, index: SegmentIndex, exp: ExperimentConfig, workers: int = 1
) -> tuple[FrameGrid, NormStats | None]:
    """Clean, aggregate and compute training-split NormStats for the dataset header."""
    trajectories = group_and_clean(points, exp.ingest.stationary_window, exp.ingest.stationary_speed_cap)
    grid = extract_frames(trajectories, index, exp.features, workers)
    raw = window_splits(grid, exp)
    if len(raw.train) == 0:
        logger.warning("No training windows in the extracted grid; dataset saved without NormStats")
        return grid, None
    return grid, compute_stats(raw.train)


def build_model(prepared: PreparedData, exp: ExperimentConfig, **overrides) -> MMCAformer:
    config = exp.model_config(
        num_segments=prepared.grid.num_segments,
        history=exp.features.history,
        horizon=exp.features.horizon,
        steps_per_day=prepared.grid.steps_per_day,
    )
    return MMCAformer(config.with_overrides(**overrides) if overrides else config)


def fit(prepared: PreparedData, exp: ExperimentConfig, **overrides) -> tuple[MMCAformer, RunRecord]:
    result = train(build_model(prepared, exp, **overrides), prepared.splits, exp.train)
    return result.model, result.record


def evaluation_windows(prepared: PreparedData) -> WindowSet:
    if len(prepared.splits.test):
        return prepared.splits.test
    logger.warning("Test split is empty; evaluating on the validation split")
    return prepared.splits.validation


@dataclass
class Evaluation:
    report: EvaluationReport
    scores: dict
    histogram: pd.DataFrame | None
    qq: pd.DataFrame | None


def evaluate_model(
    model: MMCAformer, stats: NormStats, windows: WindowSet, config: EvaluateConfig, loss: str = "t_nll"
) -> Evaluation:
    """Metrics in mph, intervals, error fit and attention summaries over `windows`."""
    if len(windows) == 0:
        raise ValueError("No windows to evaluate")
    accumulator = ScoreAccumulator()
    conditions = ConditionAttention()

    def on_batch(idx: np.ndarray, out: ForwardOutput):
        accumulator.add(out.scores)
        speeds = torch.as_tensor(denormalize(windows.macro[idx, :, :, 0], stats))
        conditions.merge(cross_attention_by_condition(out.scores.spatial_cross, speeds))

    forecast = predict(model, windows, config.batch_size, on_batch)
    loss_value = float(LOSSES[loss](forecast, batch_targets(windows)))

    lo, hi = stats.speed_range
    mph = forecast.to_mph(lo, hi)
    y = np.transpose(windows.targets_mph, (0, 2, 1))
    y_hat = mph.mean.numpy()

    lower, upper = intervals(mph, config.alpha)
    errors = (y - y_hat).ravel()
    fit_result = None
    if errors.size >= MIN_FIT_SAMPLES:
        fit_result = fit_t_errors(errors, config.qq_points)
    else:
        logger.warning(f"Only {errors.size} errors; skipping the Student-t fit")

    report = EvaluationReport(
        overall=point_metrics(y, y_hat),
        speed_bins=metrics_by_speed_bin(y, y_hat),
        horizons=metrics_by_horizon(y, y_hat),
        intervals=interval_eval(lower, upper, y, config.alpha),
        t_fit=fit_result,
        condition_attention=conditions.means(),
        loss=loss_value,
    )
    return Evaluation(
        report=report,
        scores=accumulator.mean(),
        histogram=error_histogram(errors, fit_result, config.histogram_bins) if errors.size else None,
        qq=None if fit_result is None else qq_frame(fit_result),
    )


def write_evaluation(evaluation: Evaluation, directory: Path, segment_ids: list[str]) -> list[Path]:
    directory = Path(directory)
    paths = list(evaluation.report.write(directory).values())
    scores_path = directory / "attention_scores.csv"
    write_scores(scores_path, evaluation.scores, segment_ids)
    paths.append(scores_path)
    if evaluation.histogram is not None:
        path = directory / "error_histogram.csv"
        evaluation.histogram.to_csv(path, index=False, lineterminator="\n")
        paths.append(path)
    if evaluation.qq is not None:
        path = directory / "error_qq.csv"
        evaluation.qq.to_csv(path, index=False, lineterminator="\n")
        paths.append(path)
    return paths


def summary_row(name: str, evaluation: Evaluation, record: RunRecord | None = None) -> dict[str, Any]:
    report = evaluation.report
    row = {
        "variant": name,
        "mae": report.overall.mae,
        "rmse": report.overall.rmse,
        "mape": report.overall.mape,
        "picp": report.intervals.picp,
        "mpiw": report.intervals.mpiw,
    }
    if record is not None:
        row["best_epoch"] = record.best_epoch
        row["best_validation_loss"] = record.best_validation_loss
    return row
