from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import DIRECTION_BEARINGS, SegmentIndex, Trajectory


@dataclass
class SegmentAssignment:
    """Per-segment sub-trajectories of one journey plus the count of dropped points."""

    visits: list[tuple[str, Trajectory]] = field(default_factory=list)
    dropped: int = 0

    @property
    def assigned(self) -> int:
        return sum(len(sub) for _, sub in self.visits)


def _angular_distance(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def resolve_direction(traj: Trajectory, index: SegmentIndex) -> str:
    """
    Direction of travel of `traj` among the index directions.
    With several directions, the compass label nearest to the mean heading wins.
    """
    directions = index.directions
    if len(directions) == 1:
        return directions[0]

    unknown = [d for d in directions if d.upper() not in DIRECTION_BEARINGS]
    if unknown:
        raise ValueError(
            f"Cannot match trajectories to directions {unknown}; "
            f"use compass labels {sorted(DIRECTION_BEARINGS)}"
        )
    heading = traj.mean_heading()
    return min(
        directions,
        key=lambda d: (_angular_distance(heading, DIRECTION_BEARINGS[d.upper()]), d),
    )


def assign_segments(traj: Trajectory, index: SegmentIndex) -> SegmentAssignment:
    """
    Split a trajectory into per-segment sub-trajectories.

    Segments are half-open [start, end): a point exactly on a boundary goes to the
    downstream segment. Points outside every segment are dropped and counted.
    Sub-trajectories keep point order and are listed by first visit.

    Raises:
        ValueError: If the segment index is empty.
    """
    if len(index) == 0:
        raise ValueError("Segment index is empty")

    segments = index.for_direction(resolve_direction(traj, index))
    starts = np.array([s.start_mi for s in segments])
    ends = np.array([s.end_mi for s in segments])

    slot = np.searchsorted(starts, traj.chainage, side="right") - 1
    inside = slot >= 0
    inside[inside] &= traj.chainage[inside] < ends[slot[inside]]

    assignment = SegmentAssignment(dropped=int((~inside).sum()))
    if not inside.any():
        return assignment

    inside_slots = slot[inside]
    _, first = np.unique(inside_slots, return_index=True)
    for k in inside_slots[np.sort(first)]:
        mask = inside & (slot == k)
        assignment.visits.append((segments[k].segment_id, traj.take(mask)))
    return assignment
