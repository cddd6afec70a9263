from __future__ import annotations

import datetime as dt
import json
from pathlib import Path
from typing import Any

import numpy as np

from src.logger import CustomLogger
from .data import FRAME_FIELDS, FrameGrid, NormStats

logger = CustomLogger("features").get_logger()

DATASET_FORMAT = "mmcaformer-frames"
DATASET_VERSION = 1
CHANNELS = FRAME_FIELDS + ("is_imputed",)


def save_dataset(
    path: Path,
    grid: FrameGrid,
    norm_stats: NormStats | None = None,
    metadata: dict[str, Any] | None = None,
) -> None:
    """
    Write the frame grid as one JSON header line followed by a little-endian
    float64 payload shaped days × intervals × segments × channels.
    """
    payload = np.concatenate([grid.values, grid.imputed[..., None].astype(np.float64)], axis=-1)
    header = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "days": [d.isoformat() for d in grid.days],
        "segment_ids": list(grid.segment_ids),
        "interval_s": grid.interval_s,
        "day_start_s": grid.day_start_s,
        "steps_per_day": grid.steps_per_day,
        "channels": list(CHANNELS),
        "shape": list(payload.shape),
        "dtype": "<f8",
        "norm_stats": None if norm_stats is None else norm_stats.to_dict(),
        "metadata": metadata or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        f.write(json.dumps(header, separators=(",", ":")).encode("utf-8") + b"\n")
        f.write(payload.astype("<f8").tobytes())
    logger.info(f"Saved dataset {path} with shape {tuple(payload.shape)}")


def load_dataset(path: Path) -> tuple[FrameGrid, NormStats | None, dict[str, Any]]:
    """
    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the header is unreadable or the payload size mismatches.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")

    with path.open("rb") as f:
        try:
            header = json.loads(f.readline().decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ValueError(f"Unreadable dataset header in {path}: {e}") from e
        raw = f.read()

    if header.get("format") != DATASET_FORMAT or header.get("channels") != list(CHANNELS):
        raise ValueError(f"{path} is not a {DATASET_FORMAT} dataset")
    shape = tuple(header["shape"])
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise ValueError(f"Dataset payload holds {len(raw)} bytes, expected {expected}")

    payload = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
    grid = FrameGrid(
        days=[dt.date.fromisoformat(d) for d in header["days"]],
        segment_ids=list(header["segment_ids"]),
        values=payload[..., : len(FRAME_FIELDS)].copy(),
        imputed=payload[..., len(FRAME_FIELDS)] > 0.5,
        interval_s=int(header["interval_s"]),
        day_start_s=int(header["day_start_s"]),
    )
    stats = None if header.get("norm_stats") is None else NormStats.from_dict(header["norm_stats"])
    return grid, stats, header.get("metadata", {})
