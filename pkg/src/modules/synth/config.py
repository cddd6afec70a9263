from __future__ import annotations

import datetime as dt
from dataclasses import asdict, dataclass, fields
from typing import Any

from src.helpers.errors import ConfigError
from src.modules.ingest.data import DIRECTION_BEARINGS


@dataclass(frozen=True)
class Wave:
    """
    A congestion wave born at `origin_segment` at `start_interval` of day `day`
    (0-based) that travels upstream at `propagation` segments per interval and
    holds each segment for `duration` intervals at speed free_flow × (1 − severity).
    """

    day: int
    start_interval: int
    origin_segment: int
    duration: int
    severity: float
    propagation: float = 1.0

    def front(self, segment: int) -> float | None:
        """Interval at which the wave reaches `segment`; None downstream of the origin."""
        if segment > self.origin_segment:
            return None
        return self.start_interval + (self.origin_segment - segment) / self.propagation


@dataclass(frozen=True)
class ScenarioConfig:
    n_segments: int = 20
    segment_length_mi: float = 0.4
    direction: str = "EB"
    start_date: str = "2024-03-04"
    days: int = 1
    free_flow_speed: float = 65.0
    min_speed: float = 5.0
    waves: tuple[Wave, ...] = ()
    arrival_rate: float = 6.0
    step_s: int = 3
    lead: int = 2
    baseline_brake_prob: float = 0.002
    injection_factor: float = 4.0
    brake_shock_mph: float = 12.0
    noise_sd: float = 0.8
    noise_ar: float = 0.8
    heading_sd: float = 2.0
    seed: int = 0

    def __post_init__(self):
        try:
            waves = tuple(w if isinstance(w, Wave) else Wave(**w) for w in self.waves)
        except TypeError as e:
            raise ConfigError(f"Invalid wave entry: {e}") from e
        object.__setattr__(self, "waves", waves)

        if self.n_segments < 1 or not self.segment_length_mi > 0:
            raise ConfigError("n_segments must be >= 1 and segment_length_mi positive")
        if self.days < 1:
            raise ConfigError(f"days must be >= 1, got {self.days}")
        if self.direction.upper() not in DIRECTION_BEARINGS:
            raise ConfigError(f"direction must be one of {sorted(DIRECTION_BEARINGS)}")
        try:
            self.first_day
        except ValueError as e:
            raise ConfigError(f"Invalid start_date {self.start_date}: {e}") from e
        if not 0 < self.min_speed < self.free_flow_speed < 120:
            raise ConfigError("Speeds must satisfy 0 < min_speed < free_flow_speed < 120")
        if not self.arrival_rate > 0 or self.step_s < 1 or self.lead < 0:
            raise ConfigError("arrival_rate and step_s must be positive, lead non-negative")
        if not 0 <= self.baseline_brake_prob * (1 + self.injection_factor) <= 1:
            raise ConfigError("Injected hard-brake probability must stay within [0, 1]")
        if not 0 <= self.noise_ar < 1 or self.noise_sd < 0:
            raise ConfigError("noise_ar must be in [0, 1) and noise_sd >= 0")
        for w in waves:
            if not 0 <= w.origin_segment < self.n_segments:
                raise ConfigError(f"Wave origin {w.origin_segment} outside 0..{self.n_segments - 1}")
            if not 0 < w.severity <= 1:
                raise ConfigError(f"Wave severity must be in (0, 1], got {w.severity}")
            if not 0 <= w.day < self.days or w.duration < 1 or not w.propagation > 0:
                raise ConfigError(f"Invalid wave {w}")

    @property
    def first_day(self) -> dt.date:
        return dt.date.fromisoformat(self.start_date)

    def dates(self) -> list[dt.date]:
        return [self.first_day + dt.timedelta(days=d) for d in range(self.days)]

    @property
    def heading(self) -> float:
        return DIRECTION_BEARINGS[self.direction.upper()]

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["waves"] = [asdict(w) for w in self.waves]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioConfig:
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(f"Unknown scenario config keys: {unknown}")
        return cls(**data)
