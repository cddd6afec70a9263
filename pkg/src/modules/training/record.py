from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from src.helpers.json import read_jsonl, write_jsonl


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    validation_loss: float
    wall_time_s: float


@dataclass
class RunRecord:
    """Per-epoch losses of one training run and the epoch whose weights were kept."""

    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    best_validation_loss: float = float("inf")
    stopped_early: bool = False
    test_metrics: str | None = None

    def add(self, entry: EpochRecord):
        self.epochs.append(entry)
        if entry.validation_loss < self.best_validation_loss:
            self.best_validation_loss = entry.validation_loss
            self.best_epoch = entry.epoch

    @property
    def train_losses(self) -> list[float]:
        return [e.train_loss for e in self.epochs]

    @property
    def validation_losses(self) -> list[float]:
        return [e.validation_loss for e in self.epochs]

    def summary(self) -> dict[str, Any]:
        return {
            "epochs": len(self.epochs),
            "best_epoch": self.best_epoch,
            "best_validation_loss": self.best_validation_loss,
            "stopped_early": self.stopped_early,
            "test_metrics": self.test_metrics,
        }


def write_run_record(path: Path, record: RunRecord) -> None:
    """One JSON object per epoch."""
    write_jsonl(path, (asdict(e) for e in record.epochs))


def read_run_record(path: Path) -> RunRecord:
    record = RunRecord()
    for row in read_jsonl(path):
        record.add(EpochRecord(**row))
    return record
