from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from src.helpers.process_manager import ordered_map
from src.logger import CustomLogger
from src.modules.features import FeatureConfig, FrameGrid, extract_frames
from src.modules.ingest import SegmentIndex, group_and_clean, write_points, write_segment_index
from src.modules.ingest.data import POINT_COLUMNS
from src.modules.features.data import day_epoch
from .config import ScenarioConfig

logger = CustomLogger("synth").get_logger()

WAVE_FRONT_COLUMNS = ("date", "wave", "segment_id", "front_interval", "onset_step", "lead_start_step")


@dataclass
class SyntheticCorpus:
    points: pd.DataFrame
    index: SegmentIndex
    grid: FrameGrid
    wave_fronts: pd.DataFrame

    def write(self, directory: Path) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "points": directory / "points.csv",
            "segments": directory / "segments.csv",
            "wave_fronts": directory / "wave_fronts.csv",
        }
        write_points(paths["points"], self.points)
        write_segment_index(paths["segments"], self.index)
        self.wave_fronts.to_csv(paths["wave_fronts"], index=False, lineterminator="\n")
        return paths


def speed_field(config: ScenarioConfig, day: int, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Segment speeds (steps × segments, mph) for one day and the mask of lead
    intervals in which hard braking is injected ahead of each wave front.
    """
    field = np.full((steps, config.n_segments), config.free_flow_speed)
    lead = np.zeros((steps, config.n_segments), dtype=bool)
    step_ids = np.arange(steps)
    for wave in (w for w in config.waves if w.day == day):
        for s in range(config.n_segments):
            front = wave.front(s)
            if front is None:
                continue
            active = (step_ids >= front) & (step_ids < front + wave.duration)
            congested = max(config.free_flow_speed * (1.0 - wave.severity), config.min_speed)
            field[active, s] = np.minimum(field[active, s], congested)
            onset = math.ceil(front)
            lead[max(onset - config.lead, 0) : max(onset, 0), s] = True
    return field, lead


def wave_fronts(config: ScenarioConfig, index: SegmentIndex) -> pd.DataFrame:
    rows = []
    dates = config.dates()
    for k, wave in enumerate(config.waves):
        for s, segment_id in enumerate(index.segment_ids):
            front = wave.front(s)
            if front is None:
                continue
            onset = math.ceil(front)
            rows.append((dates[wave.day].isoformat(), k, segment_id, front, onset, max(onset - config.lead, 0)))
    return pd.DataFrame(rows, columns=list(WAVE_FRONT_COLUMNS))


def _simulate_day(args) -> pd.DataFrame:
    config, day, features = args
    date = config.dates()[day]
    rng = np.random.default_rng([config.seed, day])
    steps = features.steps_per_day
    field, lead = speed_field(config, day, steps)

    origin = day_epoch(date) + features.day_start_s
    length = config.n_segments * config.segment_length_mi
    heading = config.heading
    inject = config.baseline_brake_prob * (1.0 + config.injection_factor)

    arrivals = []
    for step in range(steps):
        count = rng.poisson(config.arrival_rate)
        offsets = np.sort(rng.integers(0, features.interval_s, size=count))
        arrivals.extend(origin + step * features.interval_s + offsets)

    rows = []
    for k, t0 in enumerate(arrivals):
        journey_id = f"{date:%Y%m%d}-{k:05d}"
        t, pos, noise = int(t0), 0.0, 0.0
        while pos < length:
            seg = min(int(pos / config.segment_length_mi), config.n_segments - 1)
            step = min(max((t - origin) // features.interval_s, 0), steps - 1)
            noise = config.noise_ar * noise + rng.normal(0.0, config.noise_sd)
            if rng.random() < (inject if lead[step, seg] else config.baseline_brake_prob):
                noise -= config.brake_shock_mph
            speed = round(float(np.clip(field[step, seg] + noise, config.min_speed, 119.0)), 4)
            h = (heading + rng.normal(0.0, config.heading_sd)) % 360.0
            h = round(h, 2) if h < 359.995 else 0.0
            rows.append((journey_id, t, round(pos, 6), h, speed))
            pos += speed * config.step_s / 3600.0
            t += config.step_s

    return pd.DataFrame(rows, columns=list(POINT_COLUMNS))


def generate(
    config: ScenarioConfig, features: FeatureConfig | None = None, workers: int = 1
) -> SyntheticCorpus:
    """
    Simulate CV journeys through the scheduled waves and aggregate them.

    Vehicles enter at chainage 0 as a Poisson stream and report every `step_s`
    seconds at the local field speed plus AR(1) noise. Hard-brake shocks happen
    at a baseline rate, raised by `injection_factor` during the `lead` intervals
    before a wave front reaches the segment. Each day draws from its own seed
    derived from (seed, day), so days may be simulated in parallel.
    The frame grid is computed from the emitted points by the features pipeline.
    """
    base = features or FeatureConfig()
    features = FeatureConfig(
        interval_s=base.interval_s,
        day_start_s=base.day_start_s,
        day_end_s=base.day_end_s,
        free_flow_speed=config.free_flow_speed,
        history=base.history,
        horizon=base.horizon,
        days=tuple(d.isoformat() for d in config.dates()),
    )
    index = SegmentIndex.uniform(config.n_segments, config.segment_length_mi, config.direction.upper())

    frames = ordered_map(_simulate_day, [(config, d, features) for d in range(config.days)], workers)
    points = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=list(POINT_COLUMNS))
    logger.info(
        f"Generated {points['journey_id'].nunique()} journeys, {len(points)} points over {config.days} day(s)"
    )

    grid = extract_frames(group_and_clean(points), index, features)
    return SyntheticCorpus(points, index, grid, wave_fronts(config, index))
