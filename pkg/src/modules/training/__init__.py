from .config import TrainConfig, SplitConfig, LOSS_NAMES
from .split import DataSplits, split_by_date
from .early_stopping import EarlyStopping
from .record import EpochRecord, RunRecord, write_run_record, read_run_record
from .trainer import TrainResult, train, predict, evaluate_loss, epoch_order
from .sweep import SweepRun, sweep, grid_points
