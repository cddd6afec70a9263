from .config import ScenarioConfig, Wave
from .generator import SyntheticCorpus, generate, speed_field, wave_fronts, WAVE_FRONT_COLUMNS
