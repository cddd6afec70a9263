from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, fields

import numpy as np

from src.helpers.errors import ConfigError

MACRO_FIELDS = ("seg_speed", "cv_volume")
MICRO_FIELDS = (
    "cv_sv",
    "f_hard_acc",
    "f_med_acc",
    "f_light_acc",
    "f_hard_brk",
    "f_med_brk",
    "f_light_brk",
)
FRAME_FIELDS = MACRO_FIELDS + MICRO_FIELDS


@dataclass(frozen=True)
class FeatureConfig:
    """5-min aggregation grid covering [day_start, day_end) of each UTC day."""

    interval_s: int = 300
    day_start_s: int = 6 * 3600
    day_end_s: int = 22 * 3600
    free_flow_speed: float = 65.0
    history: int = 12
    horizon: int = 12
    days: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.interval_s <= 0:
            raise ConfigError(f"interval_s must be positive, got {self.interval_s}")
        if not 0 <= self.day_start_s < self.day_end_s <= 24 * 3600:
            raise ConfigError("day_start_s/day_end_s must satisfy 0 <= start < end <= 86400")
        if (self.day_end_s - self.day_start_s) % self.interval_s:
            raise ConfigError("The daily span must be a whole number of intervals")
        if self.history < 1 or self.horizon < 1:
            raise ConfigError("history and horizon must be >= 1")
        if self.days is not None:
            object.__setattr__(self, "days", tuple(self.days))

    @property
    def steps_per_day(self) -> int:
        return (self.day_end_s - self.day_start_s) // self.interval_s

    def day_list(self) -> list[dt.date] | None:
        if self.days is None:
            return None
        return [dt.date.fromisoformat(d) for d in self.days]


@dataclass(frozen=True)
class SegmentFrame:
    """Features of one segment over one 5-min interval."""

    segment_id: str
    interval_start: int
    seg_speed: float
    cv_volume: int
    cv_sv: float
    f_hard_acc: int
    f_med_acc: int
    f_light_acc: int
    f_hard_brk: int
    f_med_brk: int
    f_light_brk: int
    is_imputed: bool

    @property
    def macro(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in MACRO_FIELDS)

    @property
    def micro(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in MICRO_FIELDS)

    def values(self) -> np.ndarray:
        return np.array(self.macro + self.micro, dtype=np.float64)


def day_epoch(day: dt.date) -> int:
    """Epoch seconds of midnight UTC for `day`."""
    return int(dt.datetime(day.year, day.month, day.day, tzinfo=dt.timezone.utc).timestamp())


@dataclass
class FrameGrid:
    """
    Frames laid out as days × intervals × segments.

    `values` holds the nine features in FRAME_FIELDS order; `imputed` the flags.
    A day whose values contain NaN is incomplete.
    """

    days: list[dt.date]
    segment_ids: list[str]
    values: np.ndarray
    imputed: np.ndarray
    interval_s: int = 300
    day_start_s: int = 6 * 3600

    def __post_init__(self):
        d, n = len(self.days), len(self.segment_ids)
        if self.values.ndim != 4 or self.values.shape[0] != d or self.values.shape[2] != n:
            raise ValueError(
                f"Frame values shaped {self.values.shape} do not match {d} days × {n} segments"
            )
        if self.values.shape[3] != len(FRAME_FIELDS):
            raise ValueError(f"Expected {len(FRAME_FIELDS)} feature channels")
        if self.imputed.shape != self.values.shape[:3]:
            raise ValueError("imputed flags must be shaped days × intervals × segments")

    @property
    def steps_per_day(self) -> int:
        return self.values.shape[1]

    @property
    def num_segments(self) -> int:
        return len(self.segment_ids)

    def interval_start(self, day_pos: int, step: int) -> int:
        return day_epoch(self.days[day_pos]) + self.day_start_s + step * self.interval_s

    def frame(self, day_pos: int, step: int, seg_pos: int) -> SegmentFrame:
        v = self.values[day_pos, step, seg_pos]
        counts = [int(round(x)) for x in v[3:]]
        return SegmentFrame(
            self.segment_ids[seg_pos],
            self.interval_start(day_pos, step),
            float(v[0]),
            int(round(v[1])),
            float(v[2]),
            *counts,
            bool(self.imputed[day_pos, step, seg_pos]),
        )

    def frames(self) -> list[SegmentFrame]:
        d, t, n = self.imputed.shape
        return [self.frame(i, j, k) for i in range(d) for j in range(t) for k in range(n)]

    def complete_days(self) -> np.ndarray:
        return np.isfinite(self.values).all(axis=(1, 2, 3))

    def subset_segments(self, segment_ids: list[str]) -> FrameGrid:
        pos = [self.segment_ids.index(s) for s in segment_ids]
        return FrameGrid(
            list(self.days),
            list(segment_ids),
            self.values[:, :, pos].copy(),
            self.imputed[:, :, pos].copy(),
            self.interval_s,
            self.day_start_s,
        )


@dataclass
class FeatureWindow:
    """One model input/target pair: H history steps, F horizon steps, N segments."""

    macro: np.ndarray
    micro: np.ndarray
    target: np.ndarray
    tod_index: np.ndarray
    dow_index: np.ndarray
    date: dt.date


@dataclass
class WindowSet:
    """
    Stacked FeatureWindows. Arrays are W × H × N × d (inputs), W × F × N (targets),
    W × H (calendar indices). `raw_target` keeps targets in mph after normalization.
    """

    macro: np.ndarray
    micro: np.ndarray
    target: np.ndarray
    tod_index: np.ndarray
    dow_index: np.ndarray
    dates: list[dt.date]
    raw_target: np.ndarray | None = None
    normalized: bool = False

    def __len__(self) -> int:
        return self.macro.shape[0]

    def __getitem__(self, i: int) -> FeatureWindow:
        return FeatureWindow(
            self.macro[i], self.micro[i], self.target[i], self.tod_index[i], self.dow_index[i], self.dates[i]
        )

    @property
    def targets_mph(self) -> np.ndarray:
        return self.target if self.raw_target is None else self.raw_target

    def subset(self, indices) -> WindowSet:
        indices = np.asarray(indices, dtype=np.int64)
        return WindowSet(
            macro=self.macro[indices],
            micro=self.micro[indices],
            target=self.target[indices],
            tod_index=self.tod_index[indices],
            dow_index=self.dow_index[indices],
            dates=[self.dates[i] for i in indices],
            raw_target=None if self.raw_target is None else self.raw_target[indices],
            normalized=self.normalized,
        )

    @classmethod
    def empty(cls, history: int, horizon: int, num_segments: int) -> WindowSet:
        return cls(
            macro=np.zeros((0, history, num_segments, len(MACRO_FIELDS))),
            micro=np.zeros((0, history, num_segments, len(MICRO_FIELDS))),
            target=np.zeros((0, horizon, num_segments)),
            tod_index=np.zeros((0, history), dtype=np.int64),
            dow_index=np.zeros((0, history), dtype=np.int64),
            dates=[],
        )


@dataclass(frozen=True)
class NormStats:
    """Per-feature min/max over the training split; target uses the seg_speed pair."""

    macro_min: tuple[float, ...]
    macro_max: tuple[float, ...]
    micro_min: tuple[float, ...]
    micro_max: tuple[float, ...]

    def __post_init__(self):
        for name in ("macro_min", "macro_max", "micro_min", "micro_max"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if any(hi < lo for lo, hi in zip(self.macro_min, self.macro_max)) or any(
            hi < lo for lo, hi in zip(self.micro_min, self.micro_max)
        ):
            raise ValueError("NormStats requires max >= min for every feature")

    @property
    def speed_range(self) -> tuple[float, float]:
        return self.macro_min[0], self.macro_max[0]

    def to_dict(self) -> dict:
        return {f.name: list(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> NormStats:
        return cls(**{f.name: tuple(data[f.name]) for f in fields(cls)})


@dataclass
class ClipReport:
    """Counts of values pushed back into [0, 1] per feature."""

    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())
