from __future__ import annotations

from pathlib import Path
from typing import TextIO

import numpy as np
import pandas as pd

from src.logger import CustomLogger
from .data import (
    POINT_COLUMNS,
    SEGMENT_COLUMNS,
    SPEED_CAP_MPH,
    RejectionLog,
    Segment,
    SegmentIndex,
)

logger = CustomLogger("ingest").get_logger()

REASON_SPEED_CAP = "speed-cap"
REASON_MALFORMED = "malformed"
REASON_NEGATIVE_SPEED = "negative-speed"


def _empty_points() -> pd.DataFrame:
    return pd.DataFrame(
        {
            "journey_id": pd.Series([], dtype=object),
            "timestamp": pd.Series([], dtype=np.int64),
            "chainage_mi": pd.Series([], dtype=np.float64),
            "heading_deg": pd.Series([], dtype=np.float64),
            "speed_mph": pd.Series([], dtype=np.float64),
        }
    )


def parse_points(stream: TextIO) -> tuple[pd.DataFrame, RejectionLog]:
    """
    Parse connected-vehicle points from a CSV stream.

    The header must be exactly `journey_id,timestamp,chainage_mi,heading_deg,speed_mph`.
    Fields are plain comma-separated values (no quoting). Blank lines are ignored.

    Returns:
        The valid points as a DataFrame with the header's columns, and the log of
        refused rows keyed by their 1-based line number in the stream.

    Raises:
        ValueError: If the header is missing or differs from the expected one.
    """
    text = stream.read()
    log = RejectionLog()
    if not text.strip():
        return _empty_points(), log

    lines = pd.Series(text.splitlines(), dtype=object)
    header = [h.strip() for h in str(lines.iloc[0]).lstrip("﻿").split(",")]
    if header != list(POINT_COLUMNS):
        raise ValueError(
            f"Unreadable CV point header {header}; expected {list(POINT_COLUMNS)}"
        )

    body = lines.iloc[1:]
    body = body[body.str.strip() != ""]
    if body.empty:
        return _empty_points(), log

    line_no = body.index.to_numpy() + 1
    parts = body.str.split(",", expand=True)
    field_count = body.str.count(",") + 1
    parts = parts.reindex(columns=range(len(POINT_COLUMNS)))

    journey = parts[0].fillna("").str.strip()
    timestamp = pd.to_numeric(parts[1].str.strip(), errors="coerce")
    chainage = pd.to_numeric(parts[2].str.strip(), errors="coerce")
    heading = pd.to_numeric(parts[3].str.strip(), errors="coerce")
    speed = pd.to_numeric(parts[4].str.strip(), errors="coerce")

    malformed = (
        (field_count != len(POINT_COLUMNS))
        | (journey == "")
        | timestamp.isna()
        | chainage.isna()
        | heading.isna()
        | speed.isna()
        | ~np.isfinite(chainage)
        | ~np.isfinite(speed)
    )
    malformed |= timestamp % 1 != 0
    malformed |= ~((heading >= 0) & (heading < 360))

    negative = ~malformed & (speed < 0)
    capped = ~malformed & ~negative & (speed >= SPEED_CAP_MPH)

    reasons = pd.Series(np.nan, index=body.index, dtype=object)
    reasons[malformed.to_numpy()] = REASON_MALFORMED
    reasons[negative.to_numpy()] = REASON_NEGATIVE_SPEED
    reasons[capped.to_numpy()] = REASON_SPEED_CAP
    for n, reason in zip(line_no, reasons.to_numpy()):
        if isinstance(reason, str):
            log.add(int(n), reason)

    valid = reasons.isna().to_numpy()
    points = pd.DataFrame(
        {
            "journey_id": journey[valid].to_numpy(dtype=object),
            "timestamp": timestamp[valid].to_numpy().astype(np.int64),
            "chainage_mi": chainage[valid].to_numpy(dtype=np.float64),
            "heading_deg": heading[valid].to_numpy(dtype=np.float64),
            "speed_mph": speed[valid].to_numpy(dtype=np.float64),
        }
    )

    if len(log):
        logger.warning(f"Rejected {len(log)} CV rows: {log.counts()}")
    logger.info(f"Parsed {len(points)} CV points")
    return points, log


def read_points(path: Path) -> tuple[pd.DataFrame, RejectionLog]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CV point file not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        return parse_points(f)


def write_points(path: Path, points: pd.DataFrame) -> None:
    """Write points with the exact header `parse_points` expects."""
    points.loc[:, list(POINT_COLUMNS)].to_csv(
        path, index=False, float_format="%.10g", lineterminator="\n"
    )


def read_segment_index(path: Path) -> SegmentIndex:
    """
    Read a `segment_id,start_mi,end_mi,direction` CSV.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: On a wrong header, unparsable bounds or non-contiguous segments.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Segment index file not found: {path}")

    frame = pd.read_csv(path, dtype={"segment_id": str, "direction": str})
    if list(frame.columns) != list(SEGMENT_COLUMNS):
        raise ValueError(
            f"Unreadable segment index header {list(frame.columns)}; expected {list(SEGMENT_COLUMNS)}"
        )
    bounds = frame[["start_mi", "end_mi"]].apply(pd.to_numeric, errors="coerce")
    if bounds.isna().any().any():
        bad = (bounds.isna().any(axis=1).to_numpy().nonzero()[0] + 2).tolist()
        raise ValueError(f"Segment index {path}: unparsable bounds on lines {bad}")

    return SegmentIndex(
        tuple(
            Segment(str(sid), float(start), float(end), str(direction).strip())
            for sid, start, end, direction in zip(
                frame["segment_id"], bounds["start_mi"], bounds["end_mi"], frame["direction"]
            )
        )
    )


def write_segment_index(path: Path, index: SegmentIndex) -> None:
    index.to_frame().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


def write_rejection_log(path: Path, log: RejectionLog) -> None:
    log.to_frame().to_csv(path, index=False, lineterminator="\n")
