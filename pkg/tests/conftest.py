import datetime as dt

import numpy as np
import pytest

from src.modules.features import FeatureConfig, WindowSet
from src.modules.ingest import Trajectory
from src.modules.model import ModelConfig
from src.modules.synth import ScenarioConfig

# Two hours of 5-min steps keep synthetic days small
SHORT_DAY = dict(day_start_s=6 * 3600, day_end_s=8 * 3600, history=4, horizon=4)


def make_trajectory(journey_id, timestamps, speeds, chainage=None, heading=90.0):
    n = len(timestamps)
    return Trajectory(
        journey_id=journey_id,
        timestamps=np.asarray(timestamps),
        chainage=np.zeros(n) if chainage is None else np.asarray(chainage, dtype=float),
        heading=np.full(n, heading),
        speed=np.asarray(speeds, dtype=float),
    )


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    """N=4, H=F=4, d_f=4, d_a=8, two heads, two layers."""
    return ModelConfig(
        num_segments=4,
        history=4,
        horizon=4,
        input_dim=4,
        dow_dim=2,
        tod_dim=2,
        adaptive_dim=8,
        num_layers=2,
        num_heads=2,
        dropout=0.0,
        steps_per_day=24,
        seed=0,
    )


@pytest.fixture
def short_features() -> FeatureConfig:
    return FeatureConfig(**SHORT_DAY)


@pytest.fixture
def small_scenario() -> ScenarioConfig:
    return ScenarioConfig(
        n_segments=4,
        segment_length_mi=0.4,
        days=2,
        arrival_rate=2.0,
        waves=(
            {"day": 0, "start_interval": 8, "origin_segment": 3, "duration": 4, "severity": 0.6},
            {"day": 1, "start_interval": 12, "origin_segment": 2, "duration": 3, "severity": 0.5},
        ),
        seed=3,
    )


def random_windows(count=6, history=4, horizon=4, segments=4, seed=0, steps_per_day=24) -> WindowSet:
    """Normalized windows with uniform random features."""
    rng = np.random.default_rng(seed)
    starts = rng.integers(0, steps_per_day - history - horizon + 1, size=count)
    target = rng.random((count, horizon, segments))
    return WindowSet(
        macro=rng.random((count, history, segments, 2)),
        micro=rng.random((count, history, segments, 7)),
        target=target,
        tod_index=starts[:, None] + np.arange(history)[None, :],
        dow_index=np.tile(rng.integers(0, 7, size=(count, 1)), (1, history)),
        dates=[dt.date(2024, 3, 4)] * count,
        raw_target=20.0 + 50.0 * target,
        normalized=True,
    )


@pytest.fixture
def tiny_windows() -> WindowSet:
    return random_windows()
