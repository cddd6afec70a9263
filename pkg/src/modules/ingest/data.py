from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import pandas as pd

POINT_COLUMNS = ("journey_id", "timestamp", "chainage_mi", "heading_deg", "speed_mph")
SEGMENT_COLUMNS = ("segment_id", "start_mi", "end_mi", "direction")
REJECTION_COLUMNS = ("line_no", "reason")

SPEED_CAP_MPH = 120.0

# Compass labels accepted in the segment index direction column
DIRECTION_BEARINGS = {
    "N": 0.0,
    "NB": 0.0,
    "E": 90.0,
    "EB": 90.0,
    "S": 180.0,
    "SB": 180.0,
    "W": 270.0,
    "WB": 270.0,
}


@dataclass(frozen=True)
class CVPoint:
    """
    One connected-vehicle GPS ping, position already projected to corridor chainage.
    """

    journey_id: str
    timestamp: int
    chainage_mi: float
    heading_deg: float
    speed_mph: float


@dataclass
class Trajectory:
    """
    Ordered pings of one journey, stored column-wise.

    `events` holds, per point, the behavior class code of the pair ending at that
    point (-1 when there is none). It is filled by the features stage and follows
    the points through `take`.
    """

    journey_id: str
    timestamps: np.ndarray
    chainage: np.ndarray
    heading: np.ndarray
    speed: np.ndarray
    events: np.ndarray | None = None

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.chainage = np.asarray(self.chainage, dtype=np.float64)
        self.heading = np.asarray(self.heading, dtype=np.float64)
        self.speed = np.asarray(self.speed, dtype=np.float64)
        n = len(self.timestamps)
        if not (len(self.chainage) == len(self.heading) == len(self.speed) == n):
            raise ValueError(f"Trajectory {self.journey_id}: column lengths differ")
        if self.events is not None and len(self.events) != n:
            raise ValueError(f"Trajectory {self.journey_id}: events length differs")

    def __len__(self) -> int:
        return len(self.timestamps)

    def __iter__(self) -> Iterator[CVPoint]:
        for t, c, h, s in zip(self.timestamps, self.chainage, self.heading, self.speed):
            yield CVPoint(self.journey_id, int(t), float(c), float(h), float(s))

    def take(self, selector) -> Trajectory:
        """Sub-trajectory for a boolean mask or an index array, order preserved."""
        return Trajectory(
            journey_id=self.journey_id,
            timestamps=self.timestamps[selector],
            chainage=self.chainage[selector],
            heading=self.heading[selector],
            speed=self.speed[selector],
            events=None if self.events is None else self.events[selector],
        )

    @classmethod
    def from_points(cls, points: list[CVPoint]) -> Trajectory:
        if not points:
            raise ValueError("A trajectory needs at least one point")
        ids = {p.journey_id for p in points}
        if len(ids) != 1:
            raise ValueError(f"Points span several journeys: {sorted(ids)}")
        return cls(
            journey_id=points[0].journey_id,
            timestamps=[p.timestamp for p in points],
            chainage=[p.chainage_mi for p in points],
            heading=[p.heading_deg for p in points],
            speed=[p.speed_mph for p in points],
        )

    def mean_heading(self) -> float:
        """Circular mean of the headings, degrees in [0, 360)."""
        rad = np.deg2rad(self.heading)
        angle = np.rad2deg(np.arctan2(np.sin(rad).mean(), np.cos(rad).mean()))
        return float(angle % 360.0)


@dataclass(frozen=True)
class Segment:
    segment_id: str
    start_mi: float
    end_mi: float
    direction: str


@dataclass(frozen=True)
class SegmentIndex:
    """
    Ordered corridor segments. Chainage grows along the direction of travel,
    so the downstream neighbour of a segment starts where it ends.
    """

    segments: tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        ids = [s.segment_id for s in self.segments]
        if len(set(ids)) != len(ids):
            raise ValueError("Duplicate segment_id in segment index")

        for direction in self.directions:
            ordered = self.for_direction(direction)
            for seg in ordered:
                if not seg.end_mi > seg.start_mi:
                    raise ValueError(
                        f"Segment {seg.segment_id}: end {seg.end_mi} must exceed start {seg.start_mi}"
                    )
            for prev, nxt in zip(ordered, ordered[1:]):
                if not np.isclose(prev.end_mi, nxt.start_mi, rtol=0.0, atol=1e-9):
                    raise ValueError(
                        f"Segments {prev.segment_id} and {nxt.segment_id} are not contiguous "
                        f"({prev.end_mi} vs {nxt.start_mi}, direction {direction})"
                    )

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def segment_ids(self) -> list[str]:
        return [s.segment_id for s in self.segments]

    @property
    def directions(self) -> list[str]:
        return sorted({s.direction for s in self.segments})

    def for_direction(self, direction: str) -> list[Segment]:
        return sorted(
            (s for s in self.segments if s.direction == direction),
            key=lambda s: s.start_mi,
        )

    @classmethod
    def uniform(
        cls, n_segments: int, length_mi: float, direction: str = "EB", prefix: str = "seg"
    ) -> SegmentIndex:
        """Contiguous equal-length segments starting at chainage 0."""
        return cls(
            tuple(
                Segment(f"{prefix}{i:03d}", i * length_mi, (i + 1) * length_mi, direction)
                for i in range(n_segments)
            )
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(s.segment_id, s.start_mi, s.end_mi, s.direction) for s in self.segments],
            columns=list(SEGMENT_COLUMNS),
        )


@dataclass(frozen=True)
class Rejection:
    line_no: int
    reason: str


@dataclass
class RejectionLog:
    """Rows refused by the parser. Reasons: speed-cap, malformed, negative-speed."""

    entries: list[Rejection] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, line_no: int, reason: str):
        self.entries.append(Rejection(line_no, reason))

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.entries:
            out[e.reason] = out.get(e.reason, 0) + 1
        return out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(e.line_no, e.reason) for e in self.entries],
            columns=list(REJECTION_COLUMNS),
        )
