from .data import (
    MACRO_FIELDS,
    MICRO_FIELDS,
    FRAME_FIELDS,
    FeatureConfig,
    SegmentFrame,
    FrameGrid,
    FeatureWindow,
    WindowSet,
    NormStats,
    ClipReport,
)
from .behavior import (
    BehaviorClass,
    MPH_TO_MS,
    acceleration_events,
    classify_accelerations,
    speed_volatility,
)
from .aggregation import aggregate_interval, extract_frames
from .windows import build_windows
from .normalization import normalize, denormalize, compute_stats, speed_scale
from .dataset import save_dataset, load_dataset
