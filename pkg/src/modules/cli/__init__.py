from .commands import run, COMMANDS
from .config import ExperimentConfig, IngestConfig, EvaluateConfig, PenetrationConfig, load_experiment_config
from .manifest import RunManifest, run_directory
