from __future__ import annotations

import datetime as dt
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from src.helpers.files import hash_tree
from src.helpers.json import read_json, write_json

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """What a run was asked to do: enough to repeat it."""

    subcommand: str
    seed: int
    config: dict[str, Any]
    inputs: dict[str, str] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)
    run_dir: str = ""
    created_at: str = field(default_factory=lambda: dt.datetime.now(dt.timezone.utc).isoformat())
    input_hashes: dict[str, str] = field(default_factory=dict)
    output_hashes: dict[str, str] = field(default_factory=dict)
    status: str = "running"

    def write(self, directory: Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        write_json(path, asdict(self))
        return path

    def hash_inputs(self):
        self.input_hashes = hash_tree([Path(p) for p in self.inputs.values()])

    def finish(self, directory: Path, outputs: list[Path]):
        self.output_hashes = hash_tree(outputs)
        self.status = "done"
        self.write(directory)

    @classmethod
    def read(cls, directory: Path) -> RunManifest:
        return cls(**read_json(Path(directory) / MANIFEST_NAME))


def run_directory(root: Path, subcommand: str, seed: int, out: Path | None = None) -> Path:
    """`out` when given, else <root>/<subcommand>-<UTC timestamp>-seed<seed>."""
    if out is not None:
        directory = Path(out)
    else:
        stamp = dt.datetime.now(dt.timezone.utc).strftime("%Y%m%dT%H%M%S")
        directory = Path(root) / f"{subcommand}-{stamp}-seed{seed}"
    directory.mkdir(parents=True, exist_ok=True)
    return directory
