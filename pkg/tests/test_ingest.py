import io

import numpy as np
import pytest

from conftest import make_trajectory
from src.modules.ingest import (
    Segment,
    SegmentIndex,
    assign_segments,
    downsample_penetration,
    group_and_clean,
    parse_points,
    read_segment_index,
    write_points,
    write_segment_index,
)
from src.modules.ingest.cleaning import longest_stationary_span
from src.modules.ingest.segments import resolve_direction

HEADER = "journey_id,timestamp,chainage_mi,heading_deg,speed_mph\n"


def parse(body: str):
    return parse_points(io.StringIO(HEADER + body))


def frame(rows):
    text = "".join(",".join(str(v) for v in row) + "\n" for row in rows)
    points, _ = parse(text)
    return points


class TestParsePoints:
    def test_well_formed_row(self):
        points, log = parse("j1,0,1.0,90,60\n")
        assert len(log) == 0
        assert points.to_dict("records") == [
            {"journey_id": "j1", "timestamp": 0, "chainage_mi": 1.0, "heading_deg": 90.0, "speed_mph": 60.0}
        ]

    def test_empty_input(self):
        points, log = parse_points(io.StringIO(""))
        assert points.empty and len(log) == 0

    def test_header_only(self):
        points, log = parse("")
        assert points.empty and len(log) == 0

    def test_rejection_reasons_and_line_numbers(self):
        body = "j1,0,1.0,90,125\nj1,3,1.0,90,60\nj1,6,abc,90,60\nj1,9,1.0,90,-1\nj1,12,1.0,90,120\nj1,15,1.0\n"
        points, log = parse(body)
        assert len(points) == 1
        assert [(e.line_no, e.reason) for e in log.entries] == [
            (2, "speed-cap"),
            (4, "malformed"),
            (5, "negative-speed"),
            (6, "speed-cap"),
            (7, "malformed"),
        ]
        assert len(points) + len(log) == 6

    def test_heading_out_of_range_is_malformed(self):
        _, log = parse("j1,0,1.0,360,60\nj1,3,1.0,-5,60\n")
        assert log.counts() == {"malformed": 2}

    def test_fractional_timestamp_is_malformed(self):
        _, log = parse("j1,0.5,1.0,90,60\n")
        assert log.counts() == {"malformed": 1}

    def test_unreadable_header(self):
        with pytest.raises(ValueError, match="header"):
            parse_points(io.StringIO("id,time,pos\nj1,0,1\n"))

    def test_written_points_parse_back(self, tmp_path):
        points = frame([("a", 10, 0.123456789, 271.5, 61.25), ("b", 13, 1.5, 0.0, 0.0)])
        path = tmp_path / "points.csv"
        write_points(path, points)
        with path.open() as f:
            again, log = parse_points(f)
        assert len(log) == 0
        assert again.equals(points)


class TestGroupAndClean:
    def test_short_stop_is_retained(self):
        rows = [("j", 3 * k, 0.0, 90, 0.0) for k in range(30)]
        assert len(group_and_clean(frame(rows), 600, 2.0)) == 1

    def test_long_stop_drops_journey(self):
        rows = [("j", 10 * k, 0.0, 90, 0.0) for k in range(71)]
        rows += [("j", 710 + 3 * k, 0.1 * k, 90, 50.0) for k in range(5)]
        assert group_and_clean(frame(rows), 600, 2.0) == []

    def test_interleaved_journeys(self):
        rows = [("b", 9, 0.3, 90, 50), ("a", 6, 0.2, 90, 50), ("b", 3, 0.1, 90, 50), ("a", 0, 0.0, 90, 50)]
        trajs = group_and_clean(frame(rows))
        assert [t.journey_id for t in trajs] == ["a", "b"]
        np.testing.assert_array_equal(trajs[0].timestamps, [0, 6])
        np.testing.assert_array_equal(trajs[1].timestamps, [3, 9])

    def test_duplicate_timestamp_keeps_first(self):
        rows = [("a", 0, 0.0, 90, 50), ("a", 3, 0.1, 90, 51), ("a", 3, 0.2, 90, 99)]
        (traj,) = group_and_clean(frame(rows))
        np.testing.assert_array_equal(traj.speed, [50, 51])

    def test_single_point_journey_is_kept(self):
        assert len(group_and_clean(frame([("a", 0, 0.0, 90, 50)]))) == 1

    def test_shrinking_window_is_monotone(self):
        rng = np.random.default_rng(4)
        rows = []
        for j in range(40):
            speeds = np.where(rng.random(200) < 0.7, 0.5, 40.0)
            rows += [(f"j{j:02d}", 3 * k, 0.0, 90, s) for k, s in enumerate(speeds)]
        points = frame(rows)
        kept = {}
        for window in (600, 300, 120, 30):
            kept[window] = {t.journey_id for t in group_and_clean(points, window, 2.0)}
        assert kept[30] <= kept[120] <= kept[300] <= kept[600]

    def test_stationary_span(self):
        ts = np.array([0, 3, 6, 9, 12])
        assert longest_stationary_span(ts, np.array([0, 0, 5, 0, 0.0]), 2.0) == 3
        assert longest_stationary_span(ts, np.array([5, 5, 5, 5, 5.0]), 2.0) == -1
        assert longest_stationary_span(ts, np.array([5, 0, 5, 5, 5.0]), 2.0) == 0


class TestAssignSegments:
    index = SegmentIndex.uniform(3, 0.4)

    def test_one_point_per_segment(self):
        traj = make_trajectory("j", [0, 3, 6], [60, 60, 60], chainage=[0.1, 0.5, 0.9])
        assignment = assign_segments(traj, self.index)
        assert [sid for sid, _ in assignment.visits] == ["seg000", "seg001", "seg002"]
        assert all(len(sub) == 1 for _, sub in assignment.visits)

    def test_boundary_goes_downstream(self):
        traj = make_trajectory("j", [0], [60], chainage=[0.4])
        assert assign_segments(traj, self.index).visits[0][0] == "seg001"

    def test_outside_points_are_counted(self):
        traj = make_trajectory("j", [0, 3, 6], [60, 60, 60], chainage=[-1.0, 0.2, 1.3])
        assignment = assign_segments(traj, self.index)
        assert assignment.dropped == 2
        assert assignment.assigned + assignment.dropped == len(traj)

    def test_partition_covers_every_point_once(self):
        rng = np.random.default_rng(1)
        chainage = rng.uniform(-0.3, 1.5, size=200)
        traj = make_trajectory("j", np.arange(200) * 3, np.full(200, 60.0), chainage=chainage)
        assignment = assign_segments(traj, self.index)
        seen = np.concatenate([sub.timestamps for _, sub in assignment.visits])
        assert len(seen) == len(set(seen.tolist())) == assignment.assigned
        assert assignment.assigned + assignment.dropped == 200

    def test_sub_trajectories_keep_order(self):
        traj = make_trajectory("j", [0, 3, 6, 9], [60] * 4, chainage=[0.1, 0.2, 0.5, 0.3])
        visits = dict(assign_segments(traj, self.index).visits)
        np.testing.assert_array_equal(visits["seg000"].timestamps, [0, 3, 9])

    def test_empty_index(self):
        with pytest.raises(ValueError):
            assign_segments(make_trajectory("j", [0], [60]), SegmentIndex(()))

    def test_direction_follows_mean_heading(self):
        index = SegmentIndex(
            (Segment("e0", 0.0, 1.0, "EB"), Segment("w0", 0.0, 1.0, "WB"))
        )
        west = make_trajectory("j", [0, 3], [60, 60], chainage=[0.2, 0.3], heading=265.0)
        assert resolve_direction(west, index) == "WB"
        assert assign_segments(west, index).visits[0][0] == "w0"


class TestSegmentIndex:
    def test_gap_is_rejected(self):
        with pytest.raises(ValueError, match="contiguous"):
            SegmentIndex((Segment("a", 0.0, 0.4, "EB"), Segment("b", 0.5, 0.9, "EB")))

    def test_round_trip_through_csv(self, tmp_path):
        index = SegmentIndex.uniform(5, 0.25)
        path = tmp_path / "segments.csv"
        write_segment_index(path, index)
        assert read_segment_index(path) == index

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_segment_index(tmp_path / "nope.csv")


class TestDownsamplePenetration:
    def trajectories(self, n):
        return [make_trajectory(f"j{k:05d}", [0], [60]) for k in range(n)]

    def test_full_keep_is_identity(self):
        trajs = self.trajectories(50)
        kept = downsample_penetration(trajs, 1.0, 7)
        assert [t.journey_id for t in kept] == [t.journey_id for t in trajs]

    def test_kept_share(self):
        kept = downsample_penetration(self.trajectories(10_000), 0.25, 11)
        assert 2300 <= len(kept) <= 2700

    @pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
    def test_fraction_out_of_range(self, fraction):
        with pytest.raises(ValueError):
            downsample_penetration(self.trajectories(3), fraction, 0)

    def test_independent_of_input_order(self):
        trajs = self.trajectories(300)
        a = {t.journey_id for t in downsample_penetration(trajs, 0.4, 5)}
        b = {t.journey_id for t in downsample_penetration(trajs[::-1], 0.4, 5)}
        assert a == b
