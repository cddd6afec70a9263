from __future__ import annotations

import datetime as dt
from dataclasses import asdict, dataclass, fields
from typing import Any

from src.helpers.errors import ConfigError

LOSS_NAMES = ("t_nll", "gaussian_nll")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-4
    batch_size: int = 32
    max_epochs: int = 100
    early_stop_patience: int = 10
    validation_fraction: float = 0.10
    seed: int = 0
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    grad_clip_norm: float | None = 5.0
    loss: str = "t_nll"

    def __post_init__(self):
        object.__setattr__(self, "adam_betas", tuple(float(b) for b in self.adam_betas))
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 1 <= self.early_stop_patience <= self.max_epochs:
            raise ConfigError(
                f"early_stop_patience must be in [1, max_epochs={self.max_epochs}], got {self.early_stop_patience}"
            )
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError(f"validation_fraction must be in (0, 1), got {self.validation_fraction}")
        if len(self.adam_betas) != 2 or not all(0.0 <= b < 1.0 for b in self.adam_betas):
            raise ConfigError(f"adam_betas must be two values in [0, 1), got {self.adam_betas}")
        if not self.adam_eps > 0:
            raise ConfigError("adam_eps must be positive")
        if self.grad_clip_norm is not None and not self.grad_clip_norm > 0:
            raise ConfigError("grad_clip_norm must be positive or null")
        if self.loss not in LOSS_NAMES:
            raise ConfigError(f"loss must be one of {LOSS_NAMES}, got {self.loss}")

    def with_overrides(self, **overrides) -> TrainConfig:
        return TrainConfig(**{**self.to_dict(), **overrides})

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["adam_betas"] = list(self.adam_betas)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrainConfig:
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(f"Unknown train config keys: {unknown}")
        return cls(**data)


@dataclass(frozen=True)
class SplitConfig:
    """Calendar split. Dates are ISO strings; empty test_dates means no test split."""

    train_dates: tuple[str, ...] = ()
    test_dates: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "train_dates", tuple(self.train_dates))
        object.__setattr__(self, "test_dates", tuple(self.test_dates))
        try:
            self.train_days()
            self.test_days()
        except ValueError as e:
            raise ConfigError(f"Invalid split date: {e}") from e
        overlap = set(self.train_dates) & set(self.test_dates)
        if overlap:
            raise ConfigError(f"Dates in both train and test splits: {sorted(overlap)}")

    def train_days(self) -> list[dt.date]:
        return [dt.date.fromisoformat(d) for d in self.train_dates]

    def test_days(self) -> list[dt.date]:
        return [dt.date.fromisoformat(d) for d in self.test_dates]

    def to_dict(self) -> dict[str, Any]:
        return {"train_dates": list(self.train_dates), "test_dates": list(self.test_dates)}
