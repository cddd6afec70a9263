from dataclasses import dataclass
from dotenv import load_dotenv

import logging
import shutil
import os


current_file_path = os.path.abspath(__file__)
script_dir = os.path.dirname(current_file_path)
project_root = os.path.abspath(os.path.join(script_dir, ".."))

# Paths
source_file = os.path.join(project_root, ".env.example")
target_file = os.path.join(project_root, ".env")

# Copy .env if it does not exist
if not os.path.exists(target_file) and os.path.exists(source_file):
    shutil.copy2(source_file, target_file)
    logging.info(f"Copied {source_file} → {target_file}")

if not load_dotenv(target_file):
    logging.warning("No .env file loaded, falling back to default settings.")


@dataclass
class Settings:
    LOG_PATH: str
    LOG_LEVEL: str

    RUNS_PATH: str

    NUM_THREADS: int
    NUM_WORKERS: int


def parse_int(value: str | None, default: int) -> int:
    """Parse an integer setting, using the default when unset or blank."""
    if value is None or not str(value).strip():
        return default
    return int(value)


try:
    SETTINGS = Settings(
        LOG_PATH=os.getenv("LOG_PATH", os.path.join(project_root, "logs")),
        LOG_LEVEL=os.getenv("LOG_LEVEL", "INFO"),
        RUNS_PATH=os.getenv("RUNS_PATH", os.path.join(project_root, "runs")),
        NUM_THREADS=parse_int(os.getenv("NUM_THREADS"), 1),
        NUM_WORKERS=parse_int(os.getenv("NUM_WORKERS"), 1),
    )

except (TypeError, ValueError) as e:
    raise ValueError(f"Invalid value in .env: {e}. Please check the .env file.")
