from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from src.helpers.errors import ConfigError
from src.helpers.json import read_json
from src.modules.features import FeatureConfig
from src.modules.ingest.cleaning import DEFAULT_STATIONARY_SPEED_CAP_MPH, DEFAULT_STATIONARY_WINDOW_S
from src.modules.model import ModelConfig
from src.modules.synth import ScenarioConfig
from src.modules.training import SplitConfig, TrainConfig


@dataclass(frozen=True)
class IngestConfig:
    stationary_window: int = DEFAULT_STATIONARY_WINDOW_S
    stationary_speed_cap: float = DEFAULT_STATIONARY_SPEED_CAP_MPH

    def __post_init__(self):
        if self.stationary_window <= 0 or not self.stationary_speed_cap > 0:
            raise ConfigError("stationary_window and stationary_speed_cap must be positive")


@dataclass(frozen=True)
class EvaluateConfig:
    alpha: float = 0.1
    batch_size: int = 64
    histogram_bins: int = 50
    qq_points: int = 200

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.batch_size < 1 or self.histogram_bins < 1 or self.qq_points < 2:
            raise ConfigError("batch_size, histogram_bins and qq_points must be positive")


@dataclass(frozen=True)
class PenetrationConfig:
    keep_fractions: tuple[float, ...] = (1.0, 0.5, 0.25)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "keep_fractions", tuple(float(f) for f in self.keep_fractions))
        if not self.keep_fractions or not all(0 < f <= 1 for f in self.keep_fractions):
            raise ConfigError(f"keep_fractions must be non-empty values in (0, 1], got {self.keep_fractions}")


def _section(cls, data: dict[str, Any] | None, name: str):
    data = dict(data or {})
    unknown = sorted(set(data) - {f.name for f in fields(cls)})
    if unknown:
        raise ConfigError(f"Unknown keys in config section '{name}': {unknown}")
    return cls(**data)


SECTIONS = ("scenario", "ingest", "features", "split", "model", "train", "evaluate", "penetration")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Every section of an experiment config file. `model` keeps the raw overrides:
    the segment count, history, horizon and steps per day come from the dataset.
    """

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    model: dict[str, Any] = field(default_factory=dict)
    train: TrainConfig = field(default_factory=TrainConfig)
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)
    penetration: PenetrationConfig = field(default_factory=PenetrationConfig)

    def __post_init__(self):
        reserved = {"num_segments", "history", "horizon", "steps_per_day"} & set(self.model)
        if reserved:
            raise ConfigError(f"Model keys {sorted(reserved)} are derived from the dataset")
        # Fail fast on bad model overrides
        self.model_config(num_segments=1, history=1, horizon=1, steps_per_day=1)

    def model_config(self, num_segments: int, history: int, horizon: int, steps_per_day: int) -> ModelConfig:
        return ModelConfig.from_dict(
            {
                **self.model,
                "num_segments": num_segments,
                "history": history,
                "horizon": horizon,
                "steps_per_day": steps_per_day,
            }
        )

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(
            self,
            scenario=replace(self.scenario, seed=seed),
            model={**self.model, "seed": seed},
            train=self.train.with_overrides(seed=seed),
            penetration=replace(self.penetration, seed=seed),
        )

    def to_dict(self) -> dict[str, Any]:
        features = asdict(self.features)
        features["days"] = None if self.features.days is None else list(self.features.days)
        return {
            "scenario": self.scenario.to_dict(),
            "ingest": asdict(self.ingest),
            "features": features,
            "split": self.split.to_dict(),
            "model": dict(self.model),
            "train": self.train.to_dict(),
            "evaluate": asdict(self.evaluate),
            "penetration": {**asdict(self.penetration), "keep_fractions": list(self.penetration.keep_fractions)},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"Unknown config sections: {unknown}")
        model = dict(data.get("model") or {})
        if "micro_feature_mask" in model:
            model["micro_feature_mask"] = tuple(model["micro_feature_mask"])
        return cls(
            scenario=ScenarioConfig.from_dict(dict(data.get("scenario") or {})),
            ingest=_section(IngestConfig, data.get("ingest"), "ingest"),
            features=_section(FeatureConfig, data.get("features"), "features"),
            split=_section(SplitConfig, data.get("split"), "split"),
            model=model,
            train=TrainConfig.from_dict(dict(data.get("train") or {})),
            evaluate=_section(EvaluateConfig, data.get("evaluate"), "evaluate"),
            penetration=_section(PenetrationConfig, data.get("penetration"), "penetration"),
        )


def load_experiment_config(path: Path | None) -> ExperimentConfig:
    """Defaults when `path` is None; otherwise the JSON file's sections over the defaults."""
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.from_dict(read_json(Path(path)))
