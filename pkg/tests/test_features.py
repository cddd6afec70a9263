import datetime as dt
import math

import numpy as np
import pytest

from conftest import make_trajectory
from src.modules.features import (
    BehaviorClass,
    FeatureConfig,
    FrameGrid,
    NormStats,
    WindowSet,
    aggregate_interval,
    build_windows,
    classify_accelerations,
    compute_stats,
    denormalize,
    extract_frames,
    load_dataset,
    normalize,
    save_dataset,
    speed_volatility,
)
from src.modules.features.behavior import MPH_TO_MS, classify_rates
from src.modules.features.data import day_epoch
from src.modules.ingest import SegmentIndex

DAY = dt.date(2024, 3, 4)
START = day_epoch(DAY) + 6 * 3600


class TestClassifyAccelerations:
    def test_hard_acceleration(self):
        counts = classify_accelerations(make_trajectory("j", [0, 3], [40, 52]))
        assert 12 * MPH_TO_MS / 3 == pytest.approx(1.788, abs=1e-3)
        assert counts[BehaviorClass.HARD_ACC] == 1 and counts.sum() == 1

    def test_hard_braking(self):
        counts = classify_accelerations(make_trajectory("j", [0, 3], [50, 41]))
        assert counts[BehaviorClass.HARD_BRK] == 1 and counts.sum() == 1

    def test_zero_change_is_light_acceleration(self):
        counts = classify_accelerations(make_trajectory("j", [0, 3], [50, 50]))
        assert counts[BehaviorClass.LIGHT_ACC] == 1 and counts.sum() == 1

    def test_threshold_boundaries(self):
        rates = np.array([0.45, 0.89, 0.8900001, 0.4499, -0.45, -1.19, -1.1900001, -0.4499, 0.0, np.nan])
        expected = [
            BehaviorClass.MED_ACC,
            BehaviorClass.MED_ACC,
            BehaviorClass.HARD_ACC,
            BehaviorClass.LIGHT_ACC,
            BehaviorClass.MED_BRK,
            BehaviorClass.MED_BRK,
            BehaviorClass.HARD_BRK,
            BehaviorClass.LIGHT_BRK,
            BehaviorClass.LIGHT_ACC,
            -1,
        ]
        np.testing.assert_array_equal(classify_rates(rates), [int(e) for e in expected])

    def test_non_increasing_time_is_skipped(self):
        counts = classify_accelerations(make_trajectory("j", [0, 3, 3, 6], [50, 60, 20, 21]))
        assert counts.sum() == 2

    def test_one_event_per_pair(self):
        rng = np.random.default_rng(0)
        speeds = rng.uniform(0, 80, size=50)
        counts = classify_accelerations(make_trajectory("j", np.arange(50) * 3, speeds))
        assert counts.sum() == 49


class TestSpeedVolatility:
    def test_constant_speeds(self):
        assert speed_volatility([make_trajectory("j", [0, 3, 6], [60, 60, 60])]) == 0.0

    def test_two_points(self):
        assert speed_volatility([make_trajectory("j", [0, 3], [10, 20])]) == pytest.approx(7.0711, abs=1e-4)

    def test_mean_of_stds(self):
        a = make_trajectory("a", [0, 3], [50, 50 + 4 * math.sqrt(2)])
        b = make_trajectory("b", [0, 3], [50, 50 + 6 * math.sqrt(2)])
        assert speed_volatility([a, b]) == pytest.approx(5.0, abs=1e-12)

    def test_single_points_do_not_contribute(self):
        a = make_trajectory("a", [0, 3], [10, 20])
        b = make_trajectory("b", [0], [90])
        assert speed_volatility([a, b]) == speed_volatility([a])
        assert speed_volatility([b]) == 0.0


class TestAggregateInterval:
    def test_mean_of_journey_means(self):
        visits = [make_trajectory(j, [0, 3], [s - 1, s + 1]) for j, s in (("a", 60), ("b", 62), ("c", 64))]
        frame = aggregate_interval("seg000", START, visits, previous_speed=50.0)
        assert frame.seg_speed == pytest.approx(62.0)
        assert frame.cv_volume == 3
        assert not frame.is_imputed

    def test_empty_interval_is_imputed(self):
        frame = aggregate_interval("seg000", START, [], previous_speed=58.0)
        assert frame.seg_speed == 58.0
        assert frame.cv_volume == 0
        assert frame.micro == (0.0, 0, 0, 0, 0, 0, 0)
        assert frame.is_imputed

    def test_event_counts_are_summed(self):
        visits = []
        for journey, hard_brakes in (("a", 2), ("b", 0), ("c", 1)):
            t = make_trajectory(journey, [0, 3, 6], [50, 50, 50])
            t.events = np.array([-1] + [int(BehaviorClass.HARD_BRK)] * hard_brakes + [2] * (2 - hard_brakes))
            visits.append(t)
        frame = aggregate_interval("seg000", START, visits, previous_speed=50.0)
        assert frame.f_hard_brk == 3
        assert frame.f_light_acc == 3

    def test_repeated_visits_count_once(self):
        first = make_trajectory("a", [0, 3], [40, 40])
        again = make_trajectory("a", [30, 33], [60, 60])
        frame = aggregate_interval("seg000", START, [first, again], previous_speed=50.0)
        assert frame.cv_volume == 1
        assert frame.seg_speed == pytest.approx(50.0)


def _brute_force_class(rate: float) -> int:
    if rate >= 0:
        if rate > 0.89:
            return 0
        if rate >= 0.45:
            return 1
        return 2
    if -rate > 1.19:
        return 3
    if -rate >= 0.45:
        return 4
    return 5


def brute_force_grid(trajectories, index, config, day):
    """Straight loops over every point; independent of the vectorized pipeline."""
    steps, segments = config.steps_per_day, index.segment_ids
    origin = day_epoch(day) + config.day_start_s
    cells = {}
    for traj in trajectories:
        for j in range(len(traj)):
            t = int(traj.timestamps[j])
            if not origin <= t < day_epoch(day) + config.day_end_s:
                continue
            seg = None
            for s in index.segments:
                if s.start_mi <= traj.chainage[j] < s.end_mi:
                    seg = s.segment_id
            if seg is None:
                continue
            cell = cells.setdefault(((t - origin) // config.interval_s, seg), {})
            entry = cell.setdefault(traj.journey_id, {"speeds": [], "events": [0] * 6})
            entry["speeds"].append(float(traj.speed[j]))
            if j > 0 and traj.timestamps[j] > traj.timestamps[j - 1]:
                dt_s = float(traj.timestamps[j] - traj.timestamps[j - 1])
                rate = (traj.speed[j] - traj.speed[j - 1]) * 0.44704 / dt_s
                entry["events"][_brute_force_class(rate)] += 1

    values = np.zeros((steps, len(segments), 9))
    imputed = np.zeros((steps, len(segments)), dtype=bool)
    for n, seg in enumerate(segments):
        previous = config.free_flow_speed
        for t in range(steps):
            journeys = cells.get((t, seg), {})
            if not journeys:
                values[t, n, 0] = previous
                imputed[t, n] = True
                continue
            means, stds, events = [], [], [0] * 6
            for key in sorted(journeys):
                speeds = journeys[key]["speeds"]
                means.append(sum(speeds) / len(speeds))
                if len(speeds) >= 2:
                    mu = sum(speeds) / len(speeds)
                    stds.append(math.sqrt(sum((x - mu) ** 2 for x in speeds) / (len(speeds) - 1)))
                for k in range(6):
                    events[k] += journeys[key]["events"][k]
            previous = sum(means) / len(means)
            values[t, n, 0] = previous
            values[t, n, 1] = len(journeys)
            values[t, n, 2] = sum(stds) / len(stds) if stds else 0.0
            values[t, n, 3:] = events
    return values, imputed


def sample_journeys(count, seed=0):
    rng = np.random.default_rng(seed)
    journeys = []
    for k in range(count):
        n = int(rng.integers(1, 60))
        t0 = START - 200 + int(rng.integers(0, 2 * 3600))
        timestamps = t0 + 3 * np.arange(n)
        speeds = np.clip(55 + np.cumsum(rng.normal(0, 4, size=n)), 0.0, 110.0)
        chainage = rng.uniform(-0.2, 1.0) + np.concatenate([[0.0], np.cumsum(speeds[1:] * 3 / 3600)])
        journeys.append(make_trajectory(f"j{k:03d}", timestamps, speeds, chainage=chainage))
    return journeys


class TestExtractFrames:
    index = SegmentIndex.uniform(4, 0.35)
    config = FeatureConfig(day_start_s=6 * 3600, day_end_s=8 * 3600, days=(DAY.isoformat(),))

    def test_matches_brute_force(self):
        journeys = sample_journeys(100)
        grid = extract_frames(journeys, self.index, self.config)
        values, imputed = brute_force_grid(journeys, self.index, self.config, DAY)

        counts, reals = [1, 3, 4, 5, 6, 7, 8], [0, 2]
        day = grid.values[0]
        np.testing.assert_array_equal(grid.imputed[0], imputed)
        np.testing.assert_array_equal(day[..., counts], values[..., counts])
        np.testing.assert_allclose(day[..., reals], values[..., reals], rtol=0, atol=1e-9)

    def test_journey_order_does_not_matter(self):
        journeys = sample_journeys(60, seed=5)
        forward = extract_frames(journeys, self.index, self.config)
        backward = extract_frames(journeys[::-1], self.index, self.config)
        np.testing.assert_array_equal(forward.values, backward.values)

    def test_frequencies_sum_to_pairs(self):
        journeys = sample_journeys(30, seed=2)
        grid = extract_frames(journeys, self.index, self.config)
        end = START + 2 * 3600
        pairs = 0
        for traj in journeys:
            for j in range(1, len(traj)):
                inside = 0.0 <= traj.chainage[j] < self.index.segments[-1].end_mi
                pairs += bool(inside and START <= traj.timestamps[j] < end)
        assert grid.values[0, :, :, 3:].sum() == pairs

    def test_imputation_carries_forward(self):
        grid = extract_frames([], self.index, self.config)
        assert grid.imputed.all()
        np.testing.assert_array_equal(grid.values[..., 0], 65.0)

    def test_frames_expose_segment_frames(self):
        grid = extract_frames(sample_journeys(10, seed=1), self.index, self.config)
        frames = grid.frames()
        assert len(frames) == 24 * 4
        assert frames[0].interval_start == START
        assert frames[5].interval_start == START + 300
        assert all(f.cv_volume >= 0 and f.cv_sv >= 0 for f in frames)
        assert all(f.is_imputed for f in frames if f.cv_volume == 0)


def flat_grid(days, steps=192, segments=3, speed=None):
    values = np.zeros((len(days), steps, segments, 9))
    values[..., 0] = 60.0 if speed is None else speed
    return FrameGrid(list(days), [f"s{k}" for k in range(segments)], values, np.zeros(values.shape[:3], dtype=bool))


class TestBuildWindows:
    def test_windows_per_day(self):
        windows = build_windows(flat_grid([DAY]), 12, 12)
        assert len(windows) == 169
        assert windows.macro.shape == (169, 12, 3, 2)
        assert windows.micro.shape == (169, 12, 3, 7)
        assert windows.target.shape == (169, 12, 3)

    def test_calendar_indices(self):
        windows = build_windows(flat_grid([DAY, DAY + dt.timedelta(days=1)]), 12, 12)
        assert windows.tod_index[0, 0] == 0
        np.testing.assert_array_equal(windows.tod_index[5], np.arange(5, 17))
        assert windows.dow_index[0, 0] == DAY.weekday()
        assert windows.dow_index[169, 0] == (DAY.weekday() + 1) % 7
        assert windows[169].date == DAY + dt.timedelta(days=1)

    def test_targets_follow_history(self):
        speed = np.arange(192, dtype=float)[None, :, None]
        windows = build_windows(flat_grid([DAY], speed=speed), 12, 12)
        np.testing.assert_array_equal(windows.target[3, :, 0], np.arange(15, 27))
        np.testing.assert_array_equal(windows.macro[3, :, 0, 0], np.arange(3, 15))

    def test_span_longer_than_day(self):
        assert len(build_windows(flat_grid([DAY], steps=20), 12, 12)) == 0

    def test_incomplete_day_is_skipped(self):
        grid = flat_grid([DAY, DAY + dt.timedelta(days=1)])
        grid.values[0, 50, 1, 4] = np.nan
        windows = build_windows(grid, 12, 12)
        assert len(windows) == 169
        assert set(windows.dates) == {DAY + dt.timedelta(days=1)}


def speed_windows(speeds, micro=0.0):
    speeds = np.asarray(speeds, dtype=float)
    w = len(speeds)
    macro = np.zeros((w, 1, 1, 2))
    macro[:, 0, 0, 0] = speeds
    return WindowSet(
        macro=macro,
        micro=np.full((w, 1, 1, 7), micro),
        target=speeds.reshape(w, 1, 1).copy(),
        tod_index=np.zeros((w, 1), dtype=np.int64),
        dow_index=np.zeros((w, 1), dtype=np.int64),
        dates=[DAY] * w,
    )


STATS = NormStats((0.0, 0.0), (80.0, 10.0), (0.0,) * 7, (1.0,) * 7)


class TestNormalize:
    def test_midpoint(self):
        out, _, report = normalize(speed_windows([40.0]), STATS)
        assert out.macro[0, 0, 0, 0] == 0.5
        assert out.target[0, 0, 0] == 0.5
        assert report.total == 0

    def test_out_of_range_is_clipped_and_counted(self):
        out, _, report = normalize(speed_windows([90.0]), STATS)
        assert out.macro[0, 0, 0, 0] == 1.0
        assert report.counts == {"seg_speed": 1, "target": 1}
        np.testing.assert_array_equal(out.raw_target, [[[90.0]]])

    def test_round_trip(self):
        speeds = np.random.default_rng(0).uniform(20, 70, size=30)
        out, stats, _ = normalize(speed_windows(speeds))
        np.testing.assert_allclose(denormalize(out.macro[:, 0, 0, 0], stats), speeds, rtol=0, atol=1e-12)
        assert out.macro.min() >= 0 and out.macro.max() <= 1

    def test_constant_feature_maps_to_zero(self):
        out, stats, _ = normalize(speed_windows([30.0, 50.0], micro=3.0))
        assert stats.micro_min == stats.micro_max == (3.0,) * 7
        assert np.all(out.micro == 0.0)

    def test_stats_cover_targets(self):
        windows = speed_windows([30.0, 40.0])
        windows.target[1, 0, 0] = 75.0
        assert compute_stats(windows).speed_range == (30.0, 75.0)

    def test_twice_is_refused(self):
        out, stats, _ = normalize(speed_windows([30.0, 50.0]))
        with pytest.raises(ValueError):
            normalize(out, stats)


class TestDataset:
    def test_save_and_load(self, tmp_path):
        grid = extract_frames(sample_journeys(20), TestExtractFrames.index, TestExtractFrames.config)
        path = tmp_path / "dataset.bin"
        save_dataset(path, grid, STATS, {"source": "test"})
        loaded, stats, metadata = load_dataset(path)

        assert loaded.days == grid.days
        assert loaded.segment_ids == grid.segment_ids
        np.testing.assert_array_equal(loaded.values, grid.values)
        np.testing.assert_array_equal(loaded.imputed, grid.imputed)
        assert stats == STATS
        assert metadata == {"source": "test"}

    def test_not_a_dataset(self, tmp_path):
        path = tmp_path / "other.bin"
        path.write_text('{"format": "something"}\n')
        with pytest.raises(ValueError):
            load_dataset(path)
