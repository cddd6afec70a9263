from .data import (
    CVPoint,
    Trajectory,
    Segment,
    SegmentIndex,
    Rejection,
    RejectionLog,
    POINT_COLUMNS,
    SEGMENT_COLUMNS,
)
from .parser import (
    parse_points,
    read_points,
    write_points,
    read_segment_index,
    write_segment_index,
    write_rejection_log,
)
from .cleaning import group_and_clean, downsample_penetration
from .segments import assign_segments, SegmentAssignment
