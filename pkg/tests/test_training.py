import datetime as dt

import numpy as np
import pytest
import torch
from torch import nn

from conftest import random_windows
from src.helpers.errors import ConfigError, NonFiniteLossError
from src.modules.model import MMCAformer
from src.modules.objective import LOSSES
from src.modules.training import split as split_module
from src.modules.training import (
    EarlyStopping,
    EpochRecord,
    RunRecord,
    SplitConfig,
    TrainConfig,
    epoch_order,
    evaluate_loss,
    grid_points,
    predict,
    read_run_record,
    split_by_date,
    sweep,
    train,
    write_run_record,
)

DAYS = [dt.date(2024, 3, 4) + dt.timedelta(days=k) for k in range(4)]


def dated_windows(per_day=5, seed=0):
    windows = random_windows(count=per_day * len(DAYS), seed=seed)
    windows.dates = [d for d in DAYS for _ in range(per_day)]
    return windows


@pytest.fixture
def splits():
    return split_by_date(dated_windows(), DAYS[:3], DAYS[3:], validation_fraction=0.2)


def quick(**overrides) -> TrainConfig:
    return TrainConfig(**{"batch_size": 4, "max_epochs": 3, "early_stop_patience": 2, "learning_rate": 1e-3, **overrides})


class TestSplitByDate:
    def test_assignment_and_trailing_validation(self):
        windows = dated_windows()
        splits = split_by_date(windows, DAYS[:3], DAYS[3:], validation_fraction=0.1)
        assert (len(splits.train), len(splits.validation), len(splits.test)) == (14, 1, 5)
        assert splits.validation.dates == [DAYS[2]]
        assert set(splits.test.dates) == {DAYS[3]}

    def test_pool_arithmetic(self):
        windows = random_windows(count=16 * 169, seed=1)
        windows.dates = [dt.date(2024, 1, 1) + dt.timedelta(days=k // 169) for k in range(16 * 169)]
        splits = split_by_date(windows, sorted(set(windows.dates)), [], validation_fraction=0.1)
        assert len(splits.train) + len(splits.validation) == 2704
        assert len(splits.validation) == 270

    def test_unlisted_dates_are_excluded(self, monkeypatch):
        warnings = []
        monkeypatch.setattr(split_module.logger, "warning", warnings.append)
        splits = split_by_date(dated_windows(), DAYS[:2], DAYS[3:])
        assert len(splits.train) + len(splits.validation) + len(splits.test) == 15
        assert any("neither split" in w for w in warnings)

    def test_overlap_is_an_error(self):
        with pytest.raises(ValueError, match="both"):
            split_by_date(dated_windows(), DAYS[:3], DAYS[2:])

    def test_split_config_rejects_overlap(self):
        with pytest.raises(ConfigError):
            SplitConfig(train_dates=("2024-03-04",), test_dates=("2024-03-04",))


class TestEarlyStopping:
    def test_flat_loss_stops_after_patience(self):
        model = nn.Linear(1, 1)
        stopper = EarlyStopping(patience=10)
        losses = [5.0, 4.0, 3.0, 2.0, 1.0] + [1.0] * 20
        stopped = None
        for epoch, loss in enumerate(losses, start=1):
            if stopper(epoch, loss, model):
                stopped = epoch
                break
        assert stopped == 15
        assert stopper.best_epoch == 5

    def test_strict_improvement_never_stops(self):
        stopper = EarlyStopping(patience=10)
        model = nn.Linear(1, 1)
        assert not any(stopper(e, 100.0 - e, model) for e in range(1, 101))
        assert stopper.best_epoch == 100

    def test_restores_best_weights(self):
        model = nn.Linear(1, 1)
        stopper = EarlyStopping(patience=2)
        with torch.no_grad():
            model.weight.fill_(1.0)
        stopper(1, 0.5, model)
        with torch.no_grad():
            model.weight.fill_(7.0)
        stopper(2, 0.9, model)
        stopper.restore(model)
        assert model.weight.item() == 1.0


class TestAdam:
    def test_scalar_quadratic(self):
        x = torch.zeros(1, dtype=torch.float64, requires_grad=True)
        optimizer = torch.optim.Adam([x], lr=5e-4)
        for _ in range(20_000):
            optimizer.zero_grad()
            ((x - 3.0) ** 2).sum().backward()
            optimizer.step()
        assert abs(x.item() - 3.0) < 1e-3


class TestTrainConfig:
    @pytest.mark.parametrize(
        "overrides",
        [{"learning_rate": 0}, {"batch_size": 0}, {"early_stop_patience": 0}, {"validation_fraction": 1.0}, {"loss": "mse"}],
    )
    def test_rejects_out_of_range(self, overrides):
        with pytest.raises(ConfigError):
            TrainConfig(**overrides)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="Unknown"):
            TrainConfig.from_dict({"lr": 0.1})

    def test_round_trip(self):
        config = quick(adam_betas=(0.8, 0.99))
        assert TrainConfig.from_dict(config.to_dict()) == config


class TestTrain:
    def test_epoch_order_depends_on_seed_and_epoch(self):
        np.testing.assert_array_equal(epoch_order(20, 1, 3), epoch_order(20, 1, 3))
        assert not np.array_equal(epoch_order(20, 1, 3), epoch_order(20, 1, 4))
        assert sorted(epoch_order(20, 1, 3).tolist()) == list(range(20))

    def test_record_tracks_best_epoch(self, tiny_model_config, splits):
        result = train(MMCAformer(tiny_model_config), splits, quick(max_epochs=4))
        record = result.record
        assert 1 <= len(record.epochs) <= 4
        assert record.best_validation_loss == min(record.validation_losses)
        assert record.validation_losses[record.best_epoch - 1] == record.best_validation_loss

    def test_returns_best_epoch_weights(self, tiny_model_config, splits):
        result = train(MMCAformer(tiny_model_config), splits, quick(max_epochs=4))
        loss = evaluate_loss(result.model, splits.validation, batch_size=4)
        assert loss == pytest.approx(result.record.best_validation_loss, rel=1e-12)

    def test_identical_loss_traces(self, tiny_model_config, splits):
        config = tiny_model_config.with_overrides(dropout=0.2)
        first = train(MMCAformer(config), splits, quick()).record
        second = train(MMCAformer(config), splits, quick()).record
        assert first.train_losses == second.train_losses
        assert first.validation_losses == second.validation_losses

    def test_empty_validation_monitors_training_loss(self, tiny_model_config):
        splits = split_by_date(dated_windows(), DAYS, [], validation_fraction=0.2)
        splits.validation = splits.validation.subset([])
        record = train(MMCAformer(tiny_model_config), splits, quick(max_epochs=2)).record
        assert record.train_losses == record.validation_losses

    def test_empty_training_split(self, tiny_model_config, splits):
        splits.train = splits.train.subset([])
        with pytest.raises(ValueError, match="no windows"):
            train(MMCAformer(tiny_model_config), splits, quick())

    def test_non_finite_loss_names_epoch_and_batch(self, tiny_model_config, splits, monkeypatch):
        def broken(forecast, target):
            return forecast.mean.sum() * float("nan")

        monkeypatch.setitem(LOSSES, "t_nll", broken)
        with pytest.raises(NonFiniteLossError, match="epoch 1, batch 0"):
            train(MMCAformer(tiny_model_config), splits, quick())

    def test_gaussian_loss_trains(self, tiny_model_config, splits):
        record = train(MMCAformer(tiny_model_config), splits, quick(loss="gaussian_nll", max_epochs=2)).record
        assert all(np.isfinite(record.train_losses))

    def test_predict_shapes(self, tiny_model_config, splits):
        forecast = predict(MMCAformer(tiny_model_config), splits.test, batch_size=2)
        assert tuple(forecast.mean.shape) == (len(splits.test), 4, 4)
        assert torch.all(forecast.df > 2.0)

    def test_predict_on_empty_split(self, tiny_model_config, splits):
        forecast = predict(MMCAformer(tiny_model_config), splits.test.subset([]))
        assert tuple(forecast.mean.shape) == (0, 4, 4)


class TestRunRecord:
    def test_best_epoch_has_minimum_loss(self):
        record = RunRecord()
        for epoch, loss in enumerate([3.0, 1.0, 2.0], start=1):
            record.add(EpochRecord(epoch, loss + 1, loss, 0.1))
        assert record.best_epoch == 2 and record.best_validation_loss == 1.0

    def test_jsonl_round_trip(self, tmp_path):
        record = RunRecord()
        for epoch, loss in enumerate([0.75, 0.5, 0.625], start=1):
            record.add(EpochRecord(epoch, loss * 2, loss, 1.5))
        write_run_record(tmp_path / "run.jsonl", record)
        again = read_run_record(tmp_path / "run.jsonl")
        assert again.epochs == record.epochs
        assert again.best_epoch == 2


class TestSweep:
    def test_grid_enumeration(self):
        points = grid_points({"learning_rate": [1e-3, 5e-4], "num_layers": [1, 2, 3]})
        assert len(points) == 6
        assert points[0] == {"learning_rate": 1e-3, "num_layers": 1}

    @pytest.mark.parametrize("grid", [{}, {"learning_rate": []}, {"colour": [1]}])
    def test_bad_grid(self, grid):
        with pytest.raises(ConfigError):
            grid_points(grid)

    def test_runs_are_ranked(self, tiny_model_config, splits):
        runs = sweep({"learning_rate": [1e-3, 5e-4]}, tiny_model_config, quick(max_epochs=2), splits)
        assert [r.rank for r in runs] == [1, 2]
        assert {r.index for r in runs} == {0, 1}
        assert runs[0].record.best_validation_loss <= runs[1].record.best_validation_loss

    def test_single_point_matches_train(self, tiny_model_config, splits):
        config = quick(max_epochs=2)
        (run,) = sweep({"learning_rate": [config.learning_rate]}, tiny_model_config, config, splits)
        direct = train(MMCAformer(tiny_model_config), splits, config).record
        assert run.record.train_losses == direct.train_losses
