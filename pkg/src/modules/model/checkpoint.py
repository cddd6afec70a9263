from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import torch

from src.helpers.json import read_json, write_json
from src.logger import CustomLogger
from src.modules.features import NormStats
from .config import ModelConfig
from .network import MMCAformer

logger = CustomLogger("model").get_logger()

CHECKPOINT_FORMAT = "mmcaformer-checkpoint"
MANIFEST_NAME = "model.json"
PAYLOAD_NAME = "model.bin"


def save_checkpoint(
    directory: Path,
    model: MMCAformer,
    norm_stats: NormStats | None = None,
    metadata: dict[str, Any] | None = None,
) -> Path:
    """
    Write `model.json` (config, parameter names, shapes and offsets, norm stats)
    and `model.bin` (all parameters as one little-endian float64 array).
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    entries, chunks, offset = [], [], 0
    for name, value in model.state_dict().items():
        flat = value.detach().cpu().to(torch.float64).reshape(-1).numpy()
        entries.append({"name": name, "shape": list(value.shape), "offset": offset})
        chunks.append(flat)
        offset += flat.size

    payload = np.concatenate(chunks) if chunks else np.zeros(0)
    (directory / PAYLOAD_NAME).write_bytes(payload.astype("<f8").tobytes())
    write_json(
        directory / MANIFEST_NAME,
        {
            "format": CHECKPOINT_FORMAT,
            "config": model.config.to_dict(),
            "parameters": entries,
            "total": int(offset),
            "dtype": "<f8",
            "norm_stats": None if norm_stats is None else norm_stats.to_dict(),
            "metadata": metadata or {},
        },
    )
    logger.info(f"Saved checkpoint to {directory} ({offset:,} values)")
    return directory


def load_checkpoint(directory: Path) -> tuple[MMCAformer, NormStats | None, dict[str, Any]]:
    """
    Raises:
        FileNotFoundError: If the manifest or payload is missing.
        ValueError: If the manifest does not describe the payload.
    """
    directory = Path(directory)
    manifest = read_json(directory / MANIFEST_NAME)
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{directory} does not hold a {CHECKPOINT_FORMAT}")
    payload_path = directory / PAYLOAD_NAME
    if not payload_path.exists():
        raise FileNotFoundError(f"Checkpoint payload not found: {payload_path}")

    payload = np.frombuffer(payload_path.read_bytes(), dtype="<f8")
    if payload.size != manifest["total"]:
        raise ValueError(f"Checkpoint payload holds {payload.size} values, expected {manifest['total']}")

    model = MMCAformer(ModelConfig.from_dict(manifest["config"]))
    state = {}
    for entry in manifest["parameters"]:
        size = int(np.prod(entry["shape"], dtype=np.int64))
        chunk = payload[entry["offset"] : entry["offset"] + size]
        state[entry["name"]] = torch.from_numpy(chunk.copy()).reshape(entry["shape"])
    model.load_state_dict(state, strict=True)
    model.eval()

    stats = manifest.get("norm_stats")
    return model, None if stats is None else NormStats.from_dict(stats), manifest.get("metadata", {})
