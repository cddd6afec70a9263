from __future__ import annotations

import datetime as dt
from collections import defaultdict
from typing import Sequence

import numpy as np

from src.helpers.process_manager import ordered_map
from src.logger import CustomLogger
from src.modules.ingest import SegmentIndex, Trajectory, assign_segments
from .behavior import acceleration_events, count_events, speed_volatility
from .data import FRAME_FIELDS, FeatureConfig, FrameGrid, SegmentFrame, day_epoch

logger = CustomLogger("features").get_logger()

SECONDS_PER_DAY = 86400


def _merge_by_journey(visits: Sequence[Trajectory]) -> list[Trajectory]:
    by_journey: dict[str, list[Trajectory]] = defaultdict(list)
    for v in visits:
        by_journey[v.journey_id].append(v)

    merged = []
    for journey_id in sorted(by_journey):
        parts = by_journey[journey_id]
        if len(parts) == 1:
            merged.append(parts[0])
            continue
        events = None
        if all(p.events is not None for p in parts):
            events = np.concatenate([p.events for p in parts])
        merged.append(
            Trajectory(
                journey_id,
                np.concatenate([p.timestamps for p in parts]),
                np.concatenate([p.chainage for p in parts]),
                np.concatenate([p.heading for p in parts]),
                np.concatenate([p.speed for p in parts]),
                events,
            )
        )
    return merged


def aggregate_interval(
    segment_id: str,
    interval_start: int,
    visits: Sequence[Trajectory],
    previous_speed: float,
) -> SegmentFrame:
    """
    Reduce the sub-trajectories seen on one segment during one interval to a frame.

    Journeys contribute their mean speed once each. Event codes come from
    `Trajectory.events` when present, otherwise from pairs inside the visit.
    With no journeys the frame carries `previous_speed` forward and is flagged imputed.
    """
    journeys = _merge_by_journey([v for v in visits if len(v)])
    if not journeys:
        return SegmentFrame(segment_id, interval_start, float(previous_speed), 0, 0.0, 0, 0, 0, 0, 0, 0, True)

    seg_speed = float(np.mean([j.speed.mean() for j in journeys]))
    counts = np.zeros(6, dtype=np.int64)
    for j in journeys:
        codes = j.events if j.events is not None else acceleration_events(j)
        counts += count_events(codes)

    return SegmentFrame(
        segment_id,
        interval_start,
        seg_speed,
        len(journeys),
        speed_volatility(journeys),
        *(int(c) for c in counts),
        False,
    )


def _bucket_visits(
    trajectories: Sequence[Trajectory], index: SegmentIndex, config: FeatureConfig
) -> tuple[dict[tuple[dt.date, int, str], list[Trajectory]], int]:
    """Split every trajectory by (day, interval, segment). Points outside the daily span are skipped."""
    buckets: dict[tuple[dt.date, int, str], list[Trajectory]] = defaultdict(list)
    dropped = 0
    for traj in trajectories:
        annotated = traj.take(slice(None))
        annotated.events = acceleration_events(traj)
        assignment = assign_segments(annotated, index)
        dropped += assignment.dropped

        for segment_id, sub in assignment.visits:
            seconds = sub.timestamps % SECONDS_PER_DAY
            day_ordinal = sub.timestamps // SECONDS_PER_DAY
            step = (seconds - config.day_start_s) // config.interval_s
            in_span = (seconds >= config.day_start_s) & (seconds < config.day_end_s)

            keys = np.stack([day_ordinal[in_span], step[in_span]], axis=1)
            if not len(keys):
                continue
            unique_keys, inverse = np.unique(keys, axis=0, return_inverse=True)
            positions = np.flatnonzero(in_span)
            for k, (ordinal, t) in enumerate(unique_keys):
                day = dt.date(1970, 1, 1) + dt.timedelta(days=int(ordinal))
                buckets[(day, int(t), segment_id)].append(sub.take(positions[inverse.ravel() == k]))

    return buckets, dropped


def _aggregate_day(args) -> tuple[np.ndarray, np.ndarray]:
    day, segment_ids, cells, config = args
    steps = config.steps_per_day
    values = np.zeros((steps, len(segment_ids), len(FRAME_FIELDS)))
    imputed = np.zeros((steps, len(segment_ids)), dtype=bool)
    origin = day_epoch(day) + config.day_start_s

    for n, segment_id in enumerate(segment_ids):
        previous = config.free_flow_speed
        for t in range(steps):
            frame = aggregate_interval(
                segment_id, origin + t * config.interval_s, cells.get((t, segment_id), ()), previous
            )
            values[t, n] = frame.values()
            imputed[t, n] = frame.is_imputed
            previous = frame.seg_speed
    return values, imputed


def extract_frames(
    trajectories: Sequence[Trajectory],
    index: SegmentIndex,
    config: FeatureConfig | None = None,
    workers: int = 1,
) -> FrameGrid:
    """
    Build the day × interval × segment frame grid from cleaned trajectories.

    Acceleration events are computed on the full trajectory, so a pair that
    crosses a segment or interval boundary is counted where its second point lies.
    Days come from `config.days`, otherwise every UTC day with an in-span point.
    Days are aggregated independently and may run on `workers` processes.
    """
    config = config or FeatureConfig()
    buckets, dropped = _bucket_visits(trajectories, index, config)
    if dropped:
        logger.info(f"{dropped} points fell outside the segment index")

    days = config.day_list()
    if days is None:
        days = sorted({day for day, _, _ in buckets})
    segment_ids = index.segment_ids

    per_day: dict[dt.date, dict[tuple[int, str], list[Trajectory]]] = {d: {} for d in days}
    for (day, t, segment_id), visits in buckets.items():
        if day in per_day:
            per_day[day][(t, segment_id)] = visits

    results = ordered_map(
        _aggregate_day, [(d, segment_ids, per_day[d], config) for d in days], workers
    )
    steps, n = config.steps_per_day, len(segment_ids)
    values = np.stack([r[0] for r in results]) if results else np.zeros((0, steps, n, len(FRAME_FIELDS)))
    imputed = np.stack([r[1] for r in results]) if results else np.zeros((0, steps, n), dtype=bool)

    grid = FrameGrid(list(days), segment_ids, values, imputed, config.interval_s, config.day_start_s)
    if imputed.size:
        logger.info(
            f"Extracted {len(days)} days × {steps} intervals × {n} segments, "
            f"{imputed.mean():.1%} imputed"
        )
    else:
        logger.warning("No frames extracted: no observations inside the daily span")
    return grid
